#include "locallearn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "locallearn/io.hpp"
#include "locallearn/rng.hpp"

namespace locallearn {

std::string_view link_type_name(LinkType t) {
    switch (t) {
        case LinkType::Duplicate: return "Duplicate";
        case LinkType::DirectLink: return "Direct link";
        case LinkType::IndirectLink: return "Indirect link";
        case LinkType::Isolated: return "Isolated";
    }
    return "?";
}

ScoreRange link_type_score_range(LinkType t) {
    switch (t) {
        case LinkType::Duplicate: return {1.0, 1.0, false, false};
        case LinkType::DirectLink: return {0.8, 0.8, false, false};
        case LinkType::IndirectLink: return {0.0, 0.8, true, true};
        case LinkType::Isolated: return {0.0, 0.0, false, false};
    }
    return {0, 0, true, true};
}

std::optional<LinkType> link_type_for_score(double score) {
    if (score == 1.0) return LinkType::Duplicate;
    if (score == 0.8) return LinkType::DirectLink;
    if (score == 0.0) return LinkType::Isolated;
    if (score > 0.0 && score < 0.8) return LinkType::IndirectLink;
    return std::nullopt;
}

std::optional<LinkType> link_type_from_class(Label label) {
    if (label < 1 || label > 4) return std::nullopt;
    return static_cast<LinkType>(label);
}

VectorDataset::VectorDataset(std::size_t dim, int n_classes) : dim_(dim), n_classes_(n_classes) {
    if (dim < 1) throw Error("dataset dimension must be at least 1");
    if (n_classes < 2) throw Error("dataset needs at least 2 classes");
}

void VectorDataset::add(std::string id, std::span<const double> features, Label label) {
    if (features.size() != dim_) {
        throw DimensionError("instance '" + id + "' has dimension " + std::to_string(features.size()) +
                             ", expected " + std::to_string(dim_));
    }
    if (label < 1 || label > n_classes_) {
        throw Error("instance '" + id + "' has label " + std::to_string(label) + " outside 1.." +
                    std::to_string(n_classes_));
    }
    for (double v : features) {
        if (!std::isfinite(v)) throw Error("instance '" + id + "' has a non-finite feature value");
    }
    values_.insert(values_.end(), features.begin(), features.end());
    labels_.push_back(label);
    ids_.push_back(std::move(id));
}

Instance VectorDataset::instance(std::size_t i) const {
    auto f = features(i);
    return {ids_[i], {f.begin(), f.end()}, labels_[i]};
}

VectorDataset VectorDataset::subset(std::span<const std::size_t> indices) const {
    VectorDataset out;
    out.dim_ = dim_;
    out.n_classes_ = n_classes_;
    out.label_names_ = label_names_;
    out.values_.reserve(indices.size() * dim_);
    out.labels_.reserve(indices.size());
    out.ids_.reserve(indices.size());
    for (auto i : indices) {
        auto f = features(i);
        out.values_.insert(out.values_.end(), f.begin(), f.end());
        out.labels_.push_back(labels_[i]);
        out.ids_.push_back(ids_[i]);
    }
    return out;
}

std::vector<std::size_t> VectorDataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes_) + 1, 0);
    for (auto l : labels_) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

int VectorDataset::present_classes() const {
    auto c = class_counts();
    return static_cast<int>(std::count_if(c.begin() + 1, c.end(), [](auto x) { return x > 0; }));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

struct RawRow {
    std::string id;
    std::string label;
    std::vector<double> features;
    std::size_t line_no;
};

[[noreturn]] void row_error(std::size_t line_no, const std::string& what) {
    throw ParseError("row at line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

VectorDataset parse_dataset(std::string_view text, DatasetFormat format) {
    std::size_t declared_dim = 0;
    int declared_classes = 0;
    bool have_schema = false;
    std::vector<RawRow> rows;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (have_schema) continue;
            std::istringstream ss{std::string(line.substr(1))};
            std::string tok;
            while (ss >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                auto key = std::string_view(tok).substr(0, eq);
                auto val = std::string_view(tok).substr(eq + 1);
                if (key == "dim" && !parse_number(val, declared_dim)) row_error(line_no, "bad dim in schema line");
                if (key == "classes" && !parse_number(val, declared_classes))
                    row_error(line_no, "bad classes in schema line");
            }
            if (declared_dim == 0 || declared_classes == 0)
                row_error(line_no, "schema line must declare dim=<d> classes=<n>");
            have_schema = true;
            continue;
        }
        if (!have_schema) row_error(line_no, "data row before the #dim=<d> classes=<n> schema line");

        auto fields = split_fields(line);
        const std::size_t blocks = format == DatasetFormat::PairedPosts ? 2 : 1;
        const std::size_t expected = 2 + blocks * declared_dim;
        if (fields.size() != expected) {
            const std::size_t got = fields.size() >= 2 ? fields.size() - 2 : 0;
            row_error(line_no, "id '" + std::string(fields[0]) + "' has " + std::to_string(got) +
                                   " feature values, expected " + std::to_string(expected - 2));
        }
        RawRow row{std::string(fields[0]), std::string(fields[1]), {}, line_no};
        row.features.reserve(expected - 2);
        for (std::size_t j = 2; j < fields.size(); ++j) {
            double v;
            if (!parse_number(fields[j], v))
                row_error(line_no, "id '" + row.id + "' has unparsable value '" + std::string(fields[j]) + "'");
            if (!std::isfinite(v)) row_error(line_no, "id '" + row.id + "' has a non-finite value");
            row.features.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (!have_schema) throw ParseError("missing #dim=<d> classes=<n> schema line");
    if (declared_classes < 2) throw ParseError("schema must declare at least 2 classes");

    // Labels already in 1..n are used as-is; anything else is remapped in sorted order.
    bool identity = true;
    for (const auto& r : rows) {
        int v;
        if (!parse_number(r.label, v) || v < 1 || v > declared_classes) {
            identity = false;
            break;
        }
    }
    std::map<std::string, Label> mapping;
    std::vector<std::string> names;
    if (!identity) {
        bool all_int = std::all_of(rows.begin(), rows.end(), [](const RawRow& r) {
            long long v;
            return parse_number(r.label, v);
        });
        std::vector<std::string> distinct;
        for (const auto& r : rows) distinct.push_back(r.label);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (all_int) {
            std::sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
                long long x = 0, y = 0;
                parse_number(std::string_view(a), x);
                parse_number(std::string_view(b), y);
                return x < y;
            });
        }
        if (distinct.size() > static_cast<std::size_t>(declared_classes)) {
            // name the first row whose label does not fit the declared class count
            std::map<std::string, int> seen;
            for (const auto& r : rows) {
                seen.emplace(r.label, 0);
                if (seen.size() > static_cast<std::size_t>(declared_classes))
                    row_error(r.line_no, "id '" + r.id + "' has unknown label '" + r.label + "' (declared " +
                                             std::to_string(declared_classes) + " classes)");
            }
        }
        for (std::size_t i = 0; i < distinct.size(); ++i) mapping[distinct[i]] = static_cast<Label>(i + 1);
        names = distinct;
    }

    const std::size_t dim = format == DatasetFormat::PairedPosts ? 2 * declared_dim : declared_dim;
    VectorDataset data(dim, declared_classes);
    for (const auto& r : rows) {
        Label l = 0;
        if (identity) {
            parse_number(r.label, l);
        } else {
            l = mapping.at(r.label);
        }
        data.add(r.id, r.features, l);
    }
    data.set_label_names(std::move(names));
    return data;
}

VectorDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    return parse_dataset(read_file(path), format);
}

std::string format_dataset(const VectorDataset& data) {
    std::string out = "#dim=" + std::to_string(data.dim()) + " classes=" + std::to_string(data.n_classes()) + "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out += data.id(i);
        out += ',';
        const auto& names = data.label_names();
        out += names.empty() ? std::to_string(data.label(i)) : names[static_cast<std::size_t>(data.label(i) - 1)];
        for (double v : data.features(i)) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void save_dataset(const std::filesystem::path& path, const VectorDataset& data) {
    atomic_write(path, format_dataset(data));
}

namespace {

// Deals every class round-robin into `parts` buckets. The dealing position carries
// over from one class to the next so bucket sizes stay balanced overall.
std::vector<int> deal_stratified(const VectorDataset& data, int parts, Rng& rng) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.n_classes()) + 1);
    for (std::size_t i = 0; i < data.size(); ++i) by_class[static_cast<std::size_t>(data.label(i))].push_back(i);
    std::vector<int> bucket(data.size(), 0);
    std::size_t cursor = 0;
    for (auto& members : by_class) {
        shuffle(members.begin(), members.end(), rng);
        for (auto i : members) {
            bucket[i] = static_cast<int>(cursor % static_cast<std::size_t>(parts));
            ++cursor;
        }
    }
    return bucket;
}

}  // namespace

std::vector<Split> stratified_folds(const VectorDataset& data, int folds, int repeats, std::uint64_t seed) {
    if (folds < 2) throw Error("stratified_folds: folds must be at least 2");
    if (repeats < 1) throw Error("stratified_folds: repeats must be at least 1");
    auto counts = data.class_counts();
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] < static_cast<std::size_t>(folds)) {
            throw Error("stratified_folds: class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                        " members, fewer than " + std::to_string(folds) + " folds");
        }
    }
    std::vector<Split> splits;
    splits.reserve(static_cast<std::size_t>(folds * repeats));
    for (int r = 0; r < repeats; ++r) {
        Rng rng(derive_seed(seed, {seed_tag::folds, static_cast<std::uint64_t>(r)}));
        auto bucket = deal_stratified(data, folds, rng);
        for (int f = 0; f < folds; ++f) {
            Split s{r, f, {}, {}};
            for (std::size_t i = 0; i < data.size(); ++i) (bucket[i] == f ? s.test : s.train).push_back(i);
            splits.push_back(std::move(s));
        }
    }
    return splits;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_holdout(const VectorDataset& data, int parts, std::uint64_t seed) {
    if (parts < 2) throw Error("stratified_holdout: parts must be at least 2");
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.n_classes()) + 1);
    for (std::size_t i = 0; i < data.size(); ++i) by_class[static_cast<std::size_t>(data.label(i))].push_back(i);

    std::vector<char> held(data.size(), 0);
    // fractional shares carry across classes so the holdout totals about n/parts
    double carry = 0.0;
    for (auto& members : by_class) {
        if (members.empty()) continue;
        shuffle(members.begin(), members.end(), rng);
        const double share = static_cast<double>(members.size()) / parts + carry;
        auto take = static_cast<std::size_t>(share);
        carry = share - static_cast<double>(take);
        take = std::min(take, members.size() - 1);
        for (std::size_t j = 0; j < take; ++j) held[members[j]] = 1;
    }
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < data.size(); ++i) (held[i] ? out.second : out.first).push_back(i);
    return out;
}

}  // namespace locallearn
