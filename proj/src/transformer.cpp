#include "darkscan/transformer.hpp"

#include "darkscan/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

namespace darkscan {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactLoadError("missing artifact file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactLoadError(fmt::format("{} is not valid JSON: {}", path.string(), e.what()));
    }
}

std::filesystem::path artifact_root(const std::filesystem::path& dir) {
    if (std::filesystem::exists(dir / "weights.onnx")) return dir;
    if (std::filesystem::exists(dir / "model" / "weights.onnx")) return dir / "model";
    throw ArtifactLoadError("no weights.onnx in " + dir.string() + " or its model/ subdirectory");
}

}  // namespace

ModelArtifacts load_artifacts(const std::filesystem::path& dir) {
    ModelArtifacts a;
    a.root = artifact_root(dir);

    nlohmann::json labels = read_json(a.root / "labels.json");
    if (!labels.is_array() || labels.size() != kNumCategories)
        throw ArtifactLoadError("labels.json must be an array of the 8 category names");
    std::array<bool, kNumCategories> seen{};
    for (std::size_t k = 0; k < kNumCategories; ++k) {
        if (!labels[k].is_string()) throw ArtifactLoadError("labels.json entries must be strings");
        const auto name = labels[k].get<std::string>();
        Category c{};
        try {
            c = parse_label(name);
        } catch (const UnknownLabel&) {
            throw ArtifactLoadError("labels.json has unknown label '" + name + "'");
        }
        if (seen[index_of(c)]) throw ArtifactLoadError("labels.json repeats '" + name + "'");
        seen[index_of(c)] = true;
        a.label_order[k] = c;
    }

    nlohmann::json config = read_json(a.root / "config.json");
    if (!config.is_object()) throw ArtifactLoadError("config.json must be an object");
    try {
        a.max_seq_len = config.value("max_seq_len", std::size_t{128});
        a.lowercase = config.value("lowercase", true);
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactLoadError(std::string("config.json: ") + e.what());
    }
    if (a.max_seq_len < 8) throw ArtifactLoadError(fmt::format("max_seq_len {} is below 8", a.max_seq_len));
    config.erase("max_seq_len");
    config.erase("lowercase");
    a.metadata = std::move(config);

    try {
        a.vocab = Vocab::from_file(a.root / "vocab.txt");
    } catch (const FileUnreadable& e) {
        throw ArtifactLoadError(e.what());
    }
    a.graph = onnx::Graph::load(a.root / "weights.onnx");
    return a;
}

WordPieceTokenizer make_tokenizer(const ModelArtifacts& artifacts) {
    TokenizerConfig cfg;
    cfg.max_seq_len = artifacts.max_seq_len;
    cfg.lowercase = artifacts.lowercase;
    return WordPieceTokenizer(artifacts.vocab, cfg);
}

Encoding tokenize(const std::string& text, const ModelArtifacts& artifacts) {
    return make_tokenizer(artifacts).encode(text);
}

TransformerBackend::TransformerBackend(ModelArtifacts artifacts, std::size_t batch_size)
    : artifacts_(std::move(artifacts)), tokenizer_(make_tokenizer(artifacts_)), batch_size_(batch_size) {
    if (batch_size_ == 0) throw InvalidArgument("batch size must be positive");
    for (const auto& name : artifacts_.graph.input_names()) {
        if (name.find("mask") != std::string::npos) mask_input_ = name;
        else if (name.find("type") != std::string::npos) type_input_ = name;
        else if (ids_input_.empty()) ids_input_ = name;
        else throw ArtifactLoadError("model has an unexpected input '" + name + "'");
    }
    if (ids_input_.empty() || mask_input_.empty())
        throw ArtifactLoadError("model must take token ids and an attention mask");
    if (artifacts_.graph.output_names().empty()) throw ArtifactLoadError("model has no outputs");
    output_ = artifacts_.graph.output_names().front();
}

std::vector<std::array<float, kNumCategories>> TransformerBackend::logits(std::span<const std::string> texts) const {
    std::vector<std::array<float, kNumCategories>> out;
    out.reserve(texts.size());
    const auto seq = static_cast<std::int64_t>(artifacts_.max_seq_len);
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        const std::size_t n = std::min(batch_size_, texts.size() - start);
        std::vector<std::int64_t> ids, mask;
        ids.reserve(n * artifacts_.max_seq_len);
        mask.reserve(n * artifacts_.max_seq_len);
        for (std::size_t k = 0; k < n; ++k) {
            Encoding e = tokenizer_.encode(texts[start + k]);
            ids.insert(ids.end(), e.ids.begin(), e.ids.end());
            mask.insert(mask.end(), e.attention_mask.begin(), e.attention_mask.end());
        }
        const onnx::Shape shape = {static_cast<std::int64_t>(n), seq};
        onnx::TensorMap feeds;
        if (!type_input_.empty()) feeds[type_input_] = onnx::Tensor::int64s(shape, std::vector<std::int64_t>(ids.size(), 0));
        feeds[ids_input_] = onnx::Tensor::int64s(shape, std::move(ids));
        feeds[mask_input_] = onnx::Tensor::int64s(shape, std::move(mask));

        const onnx::TensorMap outputs = artifacts_.graph.run(feeds);
        const onnx::Tensor& result = outputs.at(output_);
        if (!result.is_float() || result.shape.empty() || result.shape.back() != static_cast<std::int64_t>(kNumCategories) ||
            result.numel() != static_cast<std::int64_t>(n * kNumCategories))
            throw ShapeMismatch(fmt::format("model output must be [batch, 8] logits, got shape [{}]", fmt::join(result.shape, ", ")));
        for (std::size_t k = 0; k < n; ++k) {
            std::array<float, kNumCategories> row{};
            std::copy_n(result.f.begin() + static_cast<std::ptrdiff_t>(k * kNumCategories), kNumCategories, row.begin());
            out.push_back(row);
        }
    }
    return out;
}

std::vector<CategoryDistribution> TransformerBackend::classify_batch(std::span<const std::string> texts) const {
    std::vector<CategoryDistribution> out;
    out.reserve(texts.size());
    for (const auto& row : logits(texts)) {
        std::array<double, kNumCategories> canonical{};
        for (std::size_t k = 0; k < kNumCategories; ++k) canonical[index_of(artifacts_.label_order[k])] = row[k];
        out.push_back(softmax(canonical, 1.0));
    }
    return out;
}

}  // namespace darkscan
