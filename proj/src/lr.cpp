#include "darkscan/error.hpp"
#include "darkscan/evaluation.hpp"
#include "darkscan/text.hpp"
#include "rng.hpp"

#include <fmt/format.h>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace darkscan {

namespace {

std::vector<std::string> words(const std::string& lowered) {
    std::vector<std::string> out;
    std::string current;
    const auto* s = reinterpret_cast<const std::uint8_t*>(lowered.data());
    const auto len = static_cast<int32_t>(lowered.size());
    int32_t i = 0;
    while (i < len) {
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(s, i, len, c);
        if (c >= 0 && u_isalnum(c)) {
            current.append(lowered, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

std::array<double, kNumCategories> softmax_raw(const std::array<double, kNumCategories>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    std::array<double, kNumCategories> p{};
    double sum = 0.0;
    for (std::size_t k = 0; k < kNumCategories; ++k) {
        p[k] = std::exp(z[k] - mx);
        sum += p[k];
    }
    for (auto& v : p) v /= sum;
    return p;
}

// Mean cross-entropy over `rows` of (x, y); accumulates the data gradient
// into `grad` when given.
double data_loss(const LRWeights& w, const std::vector<SparseVector>& x, const std::vector<Category>& y,
                 const std::vector<std::size_t>& rows, std::vector<double>* grad) {
    const double scale = 1.0 / static_cast<double>(rows.size());
    const std::size_t stride = w.n_features + 1;
    double loss = 0.0;
    for (auto r : rows) {
        const auto p = softmax_raw(lr_scores(w, x[r]));
        const std::size_t gold = index_of(y[r]);
        loss -= std::log(std::max(p[gold], std::numeric_limits<double>::min()));
        if (grad == nullptr) continue;
        for (std::size_t c = 0; c < kNumCategories; ++c) {
            const double d = (p[c] - (c == gold ? 1.0 : 0.0)) * scale;
            double* row = grad->data() + c * stride;
            for (const auto& [f, v] : x[r]) row[f] += d * v;
            row[w.bias_index()] += d;
        }
    }
    return loss * scale;
}

double l2_term(const LRWeights& w, double l2, std::vector<double>* grad) {
    double sq = 0.0;
    const std::size_t stride = w.n_features + 1;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        for (std::size_t f = 0; f < w.n_features; ++f) {
            const double v = w.w[c * stride + f];
            sq += v * v;
            if (grad) (*grad)[c * stride + f] += l2 * v;
        }
    }
    return 0.5 * l2 * sq;
}

}  // namespace

std::vector<std::string> lr_terms(const std::string& text) {
    const auto tokens = words(to_lower_utf8(normalize_text(text)));
    std::vector<std::string> terms = tokens;
    for (std::size_t k = 0; k + 1 < tokens.size(); ++k) terms.push_back(tokens[k] + " " + tokens[k + 1]);
    return terms;
}

void TfidfVectorizer::fit(const std::vector<std::string>& docs, std::size_t min_count) {
    std::unordered_map<std::string, std::size_t> total, df;
    for (const auto& doc : docs) {
        auto terms = lr_terms(doc);
        for (const auto& t : terms) ++total[t];
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        for (const auto& t : terms) ++df[t];
    }
    terms_.clear();
    for (const auto& [t, n] : total) {
        if (n >= min_count) terms_.push_back(t);
    }
    std::sort(terms_.begin(), terms_.end());
    index_.clear();
    idf_.clear();
    const auto n_docs = static_cast<double>(docs.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        index_.emplace(terms_[k], k);
        idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[terms_[k]]))) + 1.0);
    }
}

SparseVector TfidfVectorizer::transform(const std::string& doc) const {
    std::map<std::size_t, double> counts;
    for (const auto& t : lr_terms(doc)) {
        if (auto it = index_.find(t); it != index_.end()) counts[it->second] += 1.0;
    }
    SparseVector out;
    double norm = 0.0;
    for (const auto& [f, n] : counts) {
        const double v = n * idf_[f];
        out.emplace_back(f, v);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (auto& [f, v] : out) v /= norm;
    }
    return out;
}

TfidfVectorizer TfidfVectorizer::from_parts(std::vector<std::string> terms, std::vector<double> idf) {
    if (terms.size() != idf.size()) throw InvalidArgument("vocabulary and idf sizes differ");
    TfidfVectorizer v;
    v.terms_ = std::move(terms);
    v.idf_ = std::move(idf);
    for (std::size_t k = 0; k < v.terms_.size(); ++k) {
        if (!v.index_.emplace(v.terms_[k], k).second) throw InvalidArgument("duplicate vocabulary term '" + v.terms_[k] + "'");
    }
    return v;
}

std::array<double, kNumCategories> lr_scores(const LRWeights& w, const SparseVector& x) {
    std::array<double, kNumCategories> z{};
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        double s = w.at(c, w.bias_index());
        for (const auto& [f, v] : x) s += w.at(c, f) * v;
        z[c] = s;
    }
    return z;
}

LossAndGradient loss_and_gradient(const LRWeights& w, const std::vector<SparseVector>& x, const std::vector<Category>& y,
                                  double l2) {
    if (x.size() != y.size()) throw LengthMismatch("feature rows and labels differ in length");
    if (x.empty()) throw EmptyInput("no rows");
    LossAndGradient out;
    out.gradient.assign(w.w.size(), 0.0);
    std::vector<std::size_t> rows(x.size());
    std::iota(rows.begin(), rows.end(), 0);
    out.loss = data_loss(w, x, y, rows, &out.gradient) + l2_term(w, l2, &out.gradient);
    return out;
}

LRModel train_lr_baseline(const std::vector<LabeledExample>& train, const std::vector<LabeledExample>& val,
                          const LRHyper& hyper) {
    if (train.empty()) throw InvalidArgument("training set is empty");
    if (hyper.epochs == 0) throw InvalidArgument("epochs must be at least 1");
    if (hyper.batch_size == 0) throw InvalidArgument("batch size must be at least 1");
    if (!(hyper.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (hyper.l2 < 0.0) throw InvalidArgument("l2 must be non-negative");
    const bool single_class = std::all_of(train.begin(), train.end(), [&](const LabeledExample& e) { return e.label == train.front().label; });
    if (single_class) throw DegenerateData(fmt::format("training data has only the label '{}'", display_name(train.front().label)));

    LRModel model;
    model.hyper = hyper;
    std::vector<std::string> docs;
    docs.reserve(train.size());
    for (const auto& e : train) docs.push_back(e.text);
    model.vectorizer.fit(docs, hyper.min_term_count);
    if (model.vectorizer.size() == 0) throw DegenerateData("no term occurs often enough to form a vocabulary");

    std::vector<SparseVector> x;
    std::vector<Category> y;
    x.reserve(train.size());
    for (const auto& e : train) {
        x.push_back(model.vectorizer.transform(e.text));
        y.push_back(e.label);
    }

    LRWeights& w = model.weights;
    w.n_features = model.vectorizer.size();
    w.w.assign(kNumCategories * (w.n_features + 1), 0.0);

    std::mt19937_64 rng(hyper.seed);
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> all = order;
    std::vector<double> grad(w.w.size());
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        detail::shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const std::size_t end = std::min(order.size(), start + hyper.batch_size);
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
            std::fill(grad.begin(), grad.end(), 0.0);
            (void)data_loss(w, x, y, batch, &grad);
            (void)l2_term(w, hyper.l2, &grad);
            for (std::size_t k = 0; k < w.w.size(); ++k) w.w[k] -= hyper.learning_rate * grad[k];
        }
        model.loss_history.push_back(data_loss(w, x, y, all, nullptr) + l2_term(w, hyper.l2, nullptr));
    }
    for (double v : w.w) {
        if (!std::isfinite(v)) throw DegenerateData("training diverged; lower the learning rate");
    }

    if (val.empty()) {
        model.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    } else {
        std::vector<std::string> texts;
        std::vector<Category> gold;
        for (const auto& e : val) {
            texts.push_back(e.text);
            gold.push_back(e.label);
        }
        std::vector<Category> pred;
        for (const auto& d : lr_classify(model, texts)) pred.push_back(d.argmax());
        model.val_accuracy = compute_metrics(pred, gold).accuracy;
    }
    return model;
}

std::vector<CategoryDistribution> lr_classify(const LRModel& model, std::span<const std::string> texts) {
    std::vector<CategoryDistribution> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        const auto z = lr_scores(model.weights, model.vectorizer.transform(t));
        out.push_back(softmax(z, 1.0));
    }
    return out;
}

nlohmann::json lr_model_to_json(const LRModel& model) {
    nlohmann::json doc;
    doc["format"] = "darkscan-lr/1";
    nlohmann::json labels = nlohmann::json::array();
    for (Category c : canonical_order()) labels.push_back(std::string(display_name(c)));
    doc["labels"] = labels;
    doc["vocabulary"] = model.vectorizer.terms();
    doc["idf"] = model.vectorizer.idf();
    nlohmann::json weights = nlohmann::json::array();
    const std::size_t stride = model.weights.n_features + 1;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        weights.push_back(std::vector<double>(model.weights.w.begin() + static_cast<std::ptrdiff_t>(c * stride),
                                              model.weights.w.begin() + static_cast<std::ptrdiff_t>((c + 1) * stride)));
    }
    doc["weights"] = std::move(weights);
    doc["hyper"] = {{"learning_rate", model.hyper.learning_rate}, {"epochs", model.hyper.epochs},
                    {"l2", model.hyper.l2},                       {"batch_size", model.hyper.batch_size},
                    {"seed", model.hyper.seed},                   {"min_term_count", model.hyper.min_term_count}};
    doc["val_accuracy"] = std::isnan(model.val_accuracy) ? nlohmann::json() : nlohmann::json(model.val_accuracy);
    doc["loss_history"] = model.loss_history;
    return doc;
}

LRModel lr_model_from_json(const nlohmann::json& doc) {
    try {
        if (doc.value("format", "") != "darkscan-lr/1") throw ArtifactLoadError("not a darkscan logistic-regression model");
        const auto labels = doc.at("labels").get<std::vector<std::string>>();
        if (labels.size() != kNumCategories) throw ArtifactLoadError("model must list 8 labels");
        for (std::size_t k = 0; k < kNumCategories; ++k) {
            if (labels[k] != display_name(canonical_order()[k])) throw ArtifactLoadError("model labels are not in canonical order");
        }
        LRModel m;
        m.vectorizer = TfidfVectorizer::from_parts(doc.at("vocabulary").get<std::vector<std::string>>(),
                                                   doc.at("idf").get<std::vector<double>>());
        m.weights.n_features = m.vectorizer.size();
        const auto& rows = doc.at("weights");
        if (!rows.is_array() || rows.size() != kNumCategories) throw ArtifactLoadError("weights must have 8 rows");
        for (const auto& row : rows) {
            auto v = row.get<std::vector<double>>();
            if (v.size() != m.weights.n_features + 1) throw ArtifactLoadError("weight row length does not match the vocabulary");
            for (double x : v) {
                if (!std::isfinite(x)) throw ArtifactLoadError("non-finite weight");
            }
            m.weights.w.insert(m.weights.w.end(), v.begin(), v.end());
        }
        if (doc.contains("hyper")) {
            const auto& h = doc["hyper"];
            m.hyper.learning_rate = h.value("learning_rate", m.hyper.learning_rate);
            m.hyper.epochs = h.value("epochs", m.hyper.epochs);
            m.hyper.l2 = h.value("l2", m.hyper.l2);
            m.hyper.batch_size = h.value("batch_size", m.hyper.batch_size);
            m.hyper.seed = h.value("seed", m.hyper.seed);
            m.hyper.min_term_count = h.value("min_term_count", m.hyper.min_term_count);
        }
        const auto va = doc.value("val_accuracy", nlohmann::json());
        m.val_accuracy = va.is_number() ? va.get<double>() : std::numeric_limits<double>::quiet_NaN();
        m.loss_history = doc.value("loss_history", std::vector<double>{});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactLoadError(std::string("malformed model: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ArtifactLoadError(e.what());
    }
}

void save_lr_model(const LRModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FileUnreadable("cannot write " + path.string());
    out << lr_model_to_json(model).dump() << '\n';
}

LRModel load_lr_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactLoadError("cannot read model " + path.string());
    try {
        return lr_model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ArtifactLoadError(std::string("model is not JSON: ") + e.what());
    }
}

}  // namespace darkscan
