#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "locallearn/common.hpp"

namespace locallearn {

/// Relationship between two linked posts, keyed by the link's class id.
enum class LinkType : int { Duplicate = 1, DirectLink = 2, IndirectLink = 3, Isolated = 4 };

struct ScoreRange {
    double lo;
    double hi;
    bool lo_open;
    bool hi_open;
};

std::string_view link_type_name(LinkType t);
ScoreRange link_type_score_range(LinkType t);
/// Maps a relatedness score in [0,1] to its link type: 1.0 duplicate, 0.8 direct,
/// strictly between 0 and 0.8 indirect, 0.0 isolated. Other scores have no type.
std::optional<LinkType> link_type_for_score(double score);
std::optional<LinkType> link_type_from_class(Label label);

struct Instance {
    std::string id;
    std::vector<double> features;
    Label label = 0;
};

/// Labeled feature vectors of a fixed dimension. Features are stored row-major
/// so the dataset can be handed to the numeric kernels as a MatrixView.
class VectorDataset {
public:
    VectorDataset() = default;
    VectorDataset(std::size_t dim, int n_classes);

    /// Validates dimension, label range and finiteness.
    void add(std::string id, std::span<const double> features, Label label);
    void add(const Instance& inst) { add(inst.id, inst.features, inst.label); }

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    std::size_t dim() const { return dim_; }
    int n_classes() const { return n_classes_; }

    std::span<const double> features(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    Label label(std::size_t i) const { return labels_[i]; }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const std::vector<Label>& labels() const { return labels_; }
    Instance instance(std::size_t i) const;
    MatrixView matrix() const { return {values_, size(), dim_}; }

    VectorDataset subset(std::span<const std::size_t> indices) const;
    /// Count per class id, index 0 unused.
    std::vector<std::size_t> class_counts() const;
    /// Number of distinct labels that actually occur.
    int present_classes() const;

    /// Original label token for each class id (index = id - 1); empty when labels were used as-is.
    const std::vector<std::string>& label_names() const { return label_names_; }
    void set_label_names(std::vector<std::string> names) { label_names_ = std::move(names); }

private:
    std::size_t dim_ = 0;
    int n_classes_ = 0;
    std::vector<double> values_;
    std::vector<Label> labels_;
    std::vector<std::string> ids_;
    std::vector<std::string> label_names_;
};

enum class DatasetFormat { VectorRows, PairedPosts };

/// Reads the delimited text format:
///
///     #dim=<d> classes=<n>
///     id,label,f_1,...,f_d
///
/// In the paired-posts format each row carries two vector blocks of size d (post,
/// then related post) and the resulting features are their concatenation, so the
/// dataset dimension is 2d. Labels that are integers in [1,n] are kept; any other
/// label set is remapped in sorted order onto 1..m and the mapping is recorded.
VectorDataset load_dataset(const std::filesystem::path& path, DatasetFormat format = DatasetFormat::VectorRows);
VectorDataset parse_dataset(std::string_view text, DatasetFormat format = DatasetFormat::VectorRows);

std::string format_dataset(const VectorDataset& data);
void save_dataset(const std::filesystem::path& path, const VectorDataset& data);

struct Split {
    int repeat = 0;
    int fold = 0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Repeated stratified k-fold splits. Within a repeat the test folds partition the
/// data and each class is dealt round-robin so per-fold class counts differ from
/// the ideal proportion by at most one.
std::vector<Split> stratified_folds(const VectorDataset& data, int folds, int repeats, std::uint64_t seed);

/// Stratified holdout: roughly 1/parts of each class goes to the second half.
/// Classes too small to contribute stay entirely in the first half.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_holdout(const VectorDataset& data, int parts, std::uint64_t seed);

}  // namespace locallearn
