#include "darkscan/error.hpp"
#include "darkscan/evaluation.hpp"
#include "darkscan/text.hpp"
#include "rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace darkscan {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record.front().empty();
        if (!blank) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

Dataset parse_dataset(std::string_view csv) {
    const auto records = parse_csv(csv);
    if (records.empty()) throw MissingHeader("dataset is empty; expected a header with text and label columns");
    std::optional<std::size_t> text_col, label_col;
    for (std::size_t k = 0; k < records.front().size(); ++k) {
        const std::string name = ascii_lower(trim_ascii(records.front()[k]));
        if (name == "text" && !text_col) text_col = k;
        if (name == "label" && !label_col) label_col = k;
    }
    if (!text_col || !label_col) throw MissingHeader("dataset header must name a 'text' and a 'label' column");

    Dataset ds;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const std::size_t row = r + 1;
        if (rec.size() <= std::max(*text_col, *label_col)) {
            ds.rejects.push_back({row, "", "missing columns"});
            continue;
        }
        const std::string& raw_label = rec[*label_col];
        Category label{};
        try {
            label = parse_label(raw_label);
        } catch (const UnknownLabel&) {
            ds.rejects.push_back({row, raw_label, "unknown label"});
            continue;
        }
        std::string text = normalize_text(rec[*text_col]);
        if (text.empty()) {
            ds.rejects.push_back({row, raw_label, "empty text"});
            continue;
        }
        ds.examples.push_back({std::move(text), label});
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable("cannot read dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

DataSplit split(const std::vector<LabeledExample>& data, const SplitRatios& ratios, std::uint64_t seed) {
    const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
    for (double v : r) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("split ratios must all be positive");
    }
    if (std::fabs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw InvalidArgument("split ratios must sum to 1");

    std::array<std::vector<std::size_t>, kNumCategories> by_class;
    for (std::size_t k = 0; k < data.size(); ++k) by_class[index_of(data[k].label)].push_back(k);

    std::mt19937_64 rng(seed);
    std::array<std::vector<std::size_t>, 3> parts;
    for (Category c : canonical_order()) {
        auto members = by_class[index_of(c)];
        if (members.empty()) continue;
        const std::size_t n = members.size();
        if (n < 3)
            throw ClassTooSmall(fmt::format("label '{}' has {} example(s); at least 3 are needed for a 3-way split", display_name(c), n));
        detail::shuffle(members, rng);

        std::array<std::int64_t, 3> counts = {std::llround(r[0] * static_cast<double>(n)), std::llround(r[1] * static_cast<double>(n)), 0};
        counts[2] = static_cast<std::int64_t>(n) - counts[0] - counts[1];
        // Rounding can starve a split; borrow from the largest until each has one.
        for (int guard = 0; guard < 6; ++guard) {
            auto small = std::min_element(counts.begin(), counts.end());
            if (*small >= 1) break;
            auto large = std::max_element(counts.begin(), counts.end());
            const std::int64_t need = 1 - *small;
            *large -= need;
            *small += need;
        }
        std::size_t at = 0;
        for (std::size_t p = 0; p < 3; ++p) {
            for (std::int64_t j = 0; j < counts[p]; ++j) parts[p].push_back(members[at++]);
        }
    }

    DataSplit out;
    std::array<std::vector<LabeledExample>*, 3> dest = {&out.train, &out.val, &out.test};
    for (std::size_t p = 0; p < 3; ++p) {
        std::sort(parts[p].begin(), parts[p].end());
        for (auto k : parts[p]) dest[p]->push_back(data[k]);
    }
    return out;
}

}  // namespace darkscan
