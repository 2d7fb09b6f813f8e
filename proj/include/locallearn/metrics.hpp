#pragma once

#include <span>
#include <vector>

#include "locallearn/common.hpp"

namespace locallearn {

/// counts(i, j) = instances of actual class i predicted as class j (1-based ids).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int n_classes);

    int n_classes() const { return n_; }
    long long operator()(Label actual, Label predicted) const { return at(actual, predicted); }
    long long at(Label actual, Label predicted) const;
    void add(Label actual, Label predicted, long long count = 1);
    long long total() const;
    long long row_sum(Label actual) const;
    long long col_sum(Label predicted) const;

private:
    std::size_t index(Label a, Label p) const;
    int n_;
    std::vector<long long> counts_;
};

ConfusionMatrix confusion(std::span<const Label> actual, std::span<const Label> predicted, int n_classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct Metrics {
    std::vector<ClassMetrics> per_class;  // index = class id - 1
    ClassMetrics macro;                   // unweighted mean over classes
};

/// precision_i = C_ii / column sum, recall_i = C_ii / row sum, F1 their harmonic
/// mean. A zero denominator makes the metric 0.
Metrics metrics(const ConfusionMatrix& cm);

/// Macro F1 over the labels that occur in either `actual` or `predicted`.
double macro_f1_present(std::span<const Label> actual, std::span<const Label> predicted);

}  // namespace locallearn
