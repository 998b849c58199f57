#pragma once

#include "darkscan/backend.hpp"
#include "darkscan/detection.hpp"
#include "darkscan/distribution.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace darkscan {

struct LabeledExample {
    std::string text;
    Category label = Category::NotDarkPattern;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct RejectedRow {
    std::size_t row = 0;  // 1-based CSV record number, header is row 1
    std::string label;
    std::string reason;
};

struct Dataset {
    std::vector<LabeledExample> examples;
    std::vector<RejectedRow> rejects;
};

/// Splits CSV text into records of fields (RFC 4180 quoting, CRLF or LF).
[[nodiscard]] std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Reads a UTF-8 CSV whose header names a `text` and a `label` column (any
/// order, case-insensitive). Rows with unknown labels or empty text go to
/// rejects. Throws FileUnreadable, MissingHeader.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path);
[[nodiscard]] Dataset parse_dataset(std::string_view csv);

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

struct DataSplit {
    std::vector<LabeledExample> train, val, test;
};

/// Stratified by label and deterministic for a seed; each split keeps the
/// input order. Every label gets at least one example in each split.
/// Throws InvalidArgument for non-positive ratios or ratios not summing to
/// one, ClassTooSmall when a present label has fewer than three examples.
[[nodiscard]] DataSplit split(const std::vector<LabeledExample>& data, const SplitRatios& ratios, std::uint64_t seed);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalMetrics {
    std::size_t n = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;  // mean f1 over labels occurring in gold or predictions
    std::array<ClassMetrics, kNumCategories> per_class{};
    std::array<std::array<std::size_t, kNumCategories>, kNumCategories> confusion{};  // [gold][predicted]
    std::array<std::size_t, kNumCategories> support{};
};

/// Throws LengthMismatch, EmptyInput.
[[nodiscard]] EvalMetrics compute_metrics(const std::vector<Category>& predicted, const std::vector<Category>& gold);

[[nodiscard]] nlohmann::ordered_json metrics_to_json(const EvalMetrics& m);

/// F-beta from raw counts; 0 when undefined.
[[nodiscard]] double f_beta(std::size_t tp, std::size_t fp, std::size_t fn, double beta);

// ---------------------------------------------------------------- logistic regression

using SparseVector = std::vector<std::pair<std::size_t, double>>;  // sorted by index

/// Lowercased word unigrams and adjacent-word bigrams ("only left").
[[nodiscard]] std::vector<std::string> lr_terms(const std::string& text);

/// TF-IDF with smooth idf ln((1+n)/(1+df)) + 1 and L2-normalized rows.
class TfidfVectorizer {
public:
    /// Keeps terms occurring at least `min_count` times over all documents.
    void fit(const std::vector<std::string>& docs, std::size_t min_count = 2);
    [[nodiscard]] SparseVector transform(const std::string& doc) const;

    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] const std::vector<std::string>& terms() const noexcept { return terms_; }
    [[nodiscard]] const std::vector<double>& idf() const noexcept { return idf_; }

    /// Throws InvalidArgument when the sizes differ.
    static TfidfVectorizer from_parts(std::vector<std::string> terms, std::vector<double> idf);

private:
    std::vector<std::string> terms_;  // sorted; index = feature id
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<double> idf_;
};

struct LRHyper {
    double learning_rate = 0.5;
    std::size_t epochs = 50;
    double l2 = 1e-4;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
    std::size_t min_term_count = 2;
};

/// Row-major 8 x (features + 1); the last column is the bias.
struct LRWeights {
    std::size_t n_features = 0;
    std::vector<double> w;

    [[nodiscard]] double& at(std::size_t cls, std::size_t feature) { return w[cls * (n_features + 1) + feature]; }
    [[nodiscard]] double at(std::size_t cls, std::size_t feature) const { return w[cls * (n_features + 1) + feature]; }
    [[nodiscard]] std::size_t bias_index() const noexcept { return n_features; }
};

struct LRModel {
    TfidfVectorizer vectorizer;
    LRWeights weights;
    LRHyper hyper;
    double val_accuracy = 0.0;  // NaN when trained without validation data
    std::vector<double> loss_history;  // full-train objective after each epoch
};

/// Class scores (logits) for one feature vector.
[[nodiscard]] std::array<double, kNumCategories> lr_scores(const LRWeights& w, const SparseVector& x);

/// Mean cross-entropy plus (l2/2)|W|^2 over non-bias weights, and its
/// gradient (same layout as w.w).
struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};
[[nodiscard]] LossAndGradient loss_and_gradient(const LRWeights& w, const std::vector<SparseVector>& x,
                                                const std::vector<Category>& y, double l2);

/// Throws DegenerateData when train has a single label or no term passes
/// the frequency cut, InvalidArgument for empty train or zero epochs.
[[nodiscard]] LRModel train_lr_baseline(const std::vector<LabeledExample>& train,
                                        const std::vector<LabeledExample>& val, const LRHyper& hyper = {});

[[nodiscard]] std::vector<CategoryDistribution> lr_classify(const LRModel& model, std::span<const std::string> texts);

[[nodiscard]] nlohmann::json lr_model_to_json(const LRModel& model);
[[nodiscard]] LRModel lr_model_from_json(const nlohmann::json& doc);  // throws ArtifactLoadError
void save_lr_model(const LRModel& model, const std::filesystem::path& path);
[[nodiscard]] LRModel load_lr_model(const std::filesystem::path& path);

class LRBackend final : public ClassifierBackend {
public:
    explicit LRBackend(LRModel model) : model_(std::move(model)) {}

    [[nodiscard]] std::string name() const override { return "lr"; }
    [[nodiscard]] std::vector<CategoryDistribution> classify_batch(std::span<const std::string> texts) const override {
        return lr_classify(model_, texts);
    }
    [[nodiscard]] const LRModel& model() const noexcept { return model_; }

private:
    LRModel model_;
};

// ---------------------------------------------------------------- threshold tuning

struct ThresholdObjective {
    double beta = 1.0;  // 1 = F1

    /// "f1" or "fbeta:<beta>". Throws InvalidArgument.
    [[nodiscard]] static ThresholdObjective parse(std::string_view s);
};

struct ScoredExample {
    CategoryDistribution distribution = CategoryDistribution::uniform();
    Category gold = Category::NotDarkPattern;
};

struct TunedThresholds {
    ThresholdConfig thresholds;
    std::array<double, kNumCategories> objective{};  // achieved value per dark category
    std::map<std::string, std::string> notes;  // display name -> remark
};

/// Per dark category, sweeps the distinct probabilities seen for it and keeps
/// the threshold that maximizes one-vs-rest F-beta (ties go to the higher
/// threshold). A category without positives gets 1.0 and a note.
/// Throws EmptyInput.
[[nodiscard]] TunedThresholds tune_thresholds(const std::vector<ScoredExample>& val, const ThresholdObjective& objective);

/// One-vs-rest F-beta of flagging `c` at threshold t over `val`.
[[nodiscard]] double flag_objective(const std::vector<ScoredExample>& val, Category c, double t, double beta);

}  // namespace darkscan
