#include "locallearn/metrics.hpp"

#include <algorithm>
#include <string>

namespace locallearn {

ConfusionMatrix::ConfusionMatrix(int n_classes) : n_(n_classes) {
    if (n_classes < 1) throw Error("confusion matrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(n_classes * n_classes), 0);
}

std::size_t ConfusionMatrix::index(Label a, Label p) const {
    if (a < 1 || a > n_ || p < 1 || p > n_) {
        throw Error("confusion matrix: label pair (" + std::to_string(a) + "," + std::to_string(p) +
                    ") outside 1.." + std::to_string(n_));
    }
    return static_cast<std::size_t>((a - 1) * n_ + (p - 1));
}

long long ConfusionMatrix::at(Label actual, Label predicted) const { return counts_[index(actual, predicted)]; }

void ConfusionMatrix::add(Label actual, Label predicted, long long count) { counts_[index(actual, predicted)] += count; }

long long ConfusionMatrix::total() const {
    long long s = 0;
    for (auto c : counts_) s += c;
    return s;
}

long long ConfusionMatrix::row_sum(Label actual) const {
    long long s = 0;
    for (Label p = 1; p <= n_; ++p) s += at(actual, p);
    return s;
}

long long ConfusionMatrix::col_sum(Label predicted) const {
    long long s = 0;
    for (Label a = 1; a <= n_; ++a) s += at(a, predicted);
    return s;
}

ConfusionMatrix confusion(std::span<const Label> actual, std::span<const Label> predicted, int n_classes) {
    if (actual.size() != predicted.size()) {
        throw Error("confusion: " + std::to_string(actual.size()) + " actual labels vs " +
                    std::to_string(predicted.size()) + " predictions");
    }
    if (actual.empty()) throw Error("confusion: no labels");
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < actual.size(); ++i) cm.add(actual[i], predicted[i]);
    return cm;
}

namespace {

ClassMetrics class_metrics(long long tp, long long predicted, long long actual) {
    ClassMetrics m;
    m.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    const double s = m.precision + m.recall;
    m.f1 = s > 0.0 ? 2.0 * m.recall * m.precision / s : 0.0;
    return m;
}

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) {
    Metrics out;
    const int n = cm.n_classes();
    for (Label c = 1; c <= n; ++c) {
        out.per_class.push_back(class_metrics(cm.at(c, c), cm.col_sum(c), cm.row_sum(c)));
        out.macro.precision += out.per_class.back().precision;
        out.macro.recall += out.per_class.back().recall;
        out.macro.f1 += out.per_class.back().f1;
    }
    out.macro.precision /= n;
    out.macro.recall /= n;
    out.macro.f1 /= n;
    return out;
}

double macro_f1_present(std::span<const Label> actual, std::span<const Label> predicted) {
    if (actual.size() != predicted.size()) throw Error("macro_f1: length mismatch");
    if (actual.empty()) throw Error("macro_f1: no labels");
    Label top = 1;
    for (auto l : actual) top = std::max(top, l);
    for (auto l : predicted) top = std::max(top, l);
    const auto cm = confusion(actual, predicted, top);
    double total = 0.0;
    int present = 0;
    for (Label c = 1; c <= top; ++c) {
        if (cm.row_sum(c) == 0 && cm.col_sum(c) == 0) continue;
        total += class_metrics(cm.at(c, c), cm.col_sum(c), cm.row_sum(c)).f1;
        ++present;
    }
    return total / present;
}

}  // namespace locallearn
