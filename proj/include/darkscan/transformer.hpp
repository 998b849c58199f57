#pragma once

#include "darkscan/backend.hpp"
#include "darkscan/onnx_graph.hpp"
#include "darkscan/wordpiece.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace darkscan {

/// A fine-tuned sequence classifier exported as
///   weights.onnx  vocab.txt  labels.json  config.json
/// either directly in a directory or under its model/ subdirectory.
struct ModelArtifacts {
    std::filesystem::path root;  // directory holding the four files
    onnx::Graph graph;
    Vocab vocab;
    std::size_t max_seq_len = 128;
    bool lowercase = true;
    std::array<Category, kNumCategories> label_order{};  // model output index -> category
    nlohmann::json metadata = nlohmann::json::object();  // config.json minus the keys above
};

/// Throws ArtifactLoadError for missing/invalid files, a label list that is
/// not a permutation of the eight display names, or max_seq_len < 8.
[[nodiscard]] ModelArtifacts load_artifacts(const std::filesystem::path& dir);

[[nodiscard]] WordPieceTokenizer make_tokenizer(const ModelArtifacts& artifacts);

/// Ids and attention mask for one text, both exactly max_seq_len long.
[[nodiscard]] Encoding tokenize(const std::string& text, const ModelArtifacts& artifacts);

class TransformerBackend final : public ClassifierBackend {
public:
    static constexpr std::size_t kDefaultBatchSize = 32;

    explicit TransformerBackend(ModelArtifacts artifacts, std::size_t batch_size = kDefaultBatchSize);

    [[nodiscard]] std::string name() const override { return "transformer"; }
    [[nodiscard]] std::vector<CategoryDistribution> classify_batch(std::span<const std::string> texts) const override;

    /// Raw logits in the model's own label order, one row per text.
    [[nodiscard]] std::vector<std::array<float, kNumCategories>> logits(std::span<const std::string> texts) const;

    [[nodiscard]] const ModelArtifacts& artifacts() const noexcept { return artifacts_; }

private:
    ModelArtifacts artifacts_;
    WordPieceTokenizer tokenizer_;
    std::size_t batch_size_;
    std::string ids_input_, mask_input_, type_input_, output_;
};

/// Client of a running service's POST /v1/classify.
class RemoteBackend final : public ClassifierBackend {
public:
    /// `endpoint` is the service base URL, e.g. "http://127.0.0.1:8787".
    /// Throws InvalidArgument for a non-http(s) URL.
    explicit RemoteBackend(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30));

    [[nodiscard]] std::string name() const override { return "remote"; }

    /// Throws EndpointUnavailable for transport failures and non-2xx replies,
    /// MalformedResponse for bodies that break the wire contract.
    [[nodiscard]] std::vector<CategoryDistribution> classify_batch(std::span<const std::string> texts) const override;

private:
    std::string endpoint_;
    std::chrono::milliseconds timeout_;
};

/// Reads one {"probabilities": {display name: number x8}} entry. Sums within
/// 1e-4 of one are renormalized. Throws MalformedResponse.
[[nodiscard]] CategoryDistribution distribution_from_wire(const nlohmann::json& probabilities);

}  // namespace darkscan
