#include <algorithm>
#include <cmath>
#include <list>
#include <map>
#include <sstream>

#include "locallearn/classifiers.hpp"

namespace locallearn {

namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel matrix rows K(i, .), computed on demand.
class KernelRowCache {
public:
    KernelRowCache(MatrixView x, const KernelParams& p, std::span<const double> norms, std::size_t budget_bytes,
                   Exec exec, const std::string& config_desc)
        : x_(x), p_(p), norms_(norms), exec_(exec), config_desc_(config_desc), rows_(x.rows), where_(x.rows) {
        const std::size_t row_bytes = std::max<std::size_t>(1, x.rows * sizeof(double));
        capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
    }

    std::span<const double> row(std::size_t i) {
        if (!rows_[i].empty()) {
            lru_.splice(lru_.begin(), lru_, where_[i]);
            return rows_[i];
        }
        if (lru_.size() >= capacity_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            std::vector<double>().swap(rows_[victim]);
        }
        rows_[i].resize(x_.rows);
        kernels::kernel_row(exec_, p_, x_, norms_, x_.row(i), norms_[i], rows_[i]);
        for (double v : rows_[i]) {
            if (!std::isfinite(v)) throw Error("svm: non-finite kernel value with " + config_desc_);
        }
        lru_.push_front(i);
        where_[i] = lru_.begin();
        return rows_[i];
    }

private:
    MatrixView x_;
    KernelParams p_;
    std::span<const double> norms_;
    Exec exec_;
    std::string config_desc_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::list<std::size_t>::iterator> where_;
    std::list<std::size_t> lru_;
    std::size_t capacity_ = 2;
};

std::string kernel_desc(const KernelParams& p, double C) {
    std::ostringstream ss;
    ss << "C=" << C << " kernel=" << kernel_name(p.type) << " gamma=" << p.gamma << " coef0=" << p.coef0;
    return ss.str();
}

}  // namespace

double svm_dual_objective(MatrixView x, std::span<const double> y, const KernelParams& kernel,
                          std::span<const double> alpha) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        lin += alpha[i];
        if (alpha[i] == 0.0) continue;
        for (std::size_t j = 0; j < x.rows; ++j) {
            if (alpha[j] == 0.0) continue;
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel_value(kernel, x.row(i), x.row(j));
        }
    }
    return lin - 0.5 * quad;
}

SmoSolution smo_solve(MatrixView x, std::span<const double> y, const KernelParams& kernel, double C,
                      const SmoOptions& opts) {
    const std::size_t n = x.rows;
    if (n == 0) throw Error("svm: empty training problem");
    if (!(C > 0.0)) throw Error("svm: C must be positive");
    const std::string desc = kernel_desc(kernel, C);

    std::vector<double> norms(n);
    kernels::squared_norms(opts.exec, x, norms);
    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) {
        qd[i] = kernel_from_dot(kernel, norms[i], norms[i], norms[i]);
        if (!std::isfinite(qd[i])) throw Error("svm: non-finite kernel value with " + desc);
    }
    KernelRowCache cache(x, kernel, norms, opts.cache_bytes, opts.exec, desc);

    SmoSolution sol;
    sol.alpha.assign(n, 0.0);
    auto& alpha = sol.alpha;
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a

    const long long max_iter =
        opts.max_iter >= 0 ? opts.max_iter : 10LL * static_cast<long long>(n) * static_cast<long long>(n);
    auto dual_objective = [&] {
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += alpha[t] * (grad[t] - 1.0);
        return -0.5 * s;
    };

    while (sol.iterations < max_iter) {
        // i: maximal violator in the "up" set
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (alpha[t] < C && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i = static_cast<std::ptrdiff_t>(t);
                }
            } else if (alpha[t] > 0 && grad[t] >= gmax) {
                gmax = grad[t];
                i = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i < 0) {
            sol.converged = true;
            break;
        }
        const auto iu = static_cast<std::size_t>(i);
        const auto ki = cache.row(iu);

        // j: second-order choice among the "low" set
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t j = -1;
        double best_obj = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (alpha[t] > 0) {
                    const double gd = gmax + grad[t];
                    gmax2 = std::max(gmax2, grad[t]);
                    if (gd > 0) {
                        double quad = qd[iu] + qd[t] - 2.0 * ki[t];
                        quad = quad > 0 ? quad : kTau;
                        const double obj = -(gd * gd) / quad;
                        if (obj <= best_obj) {
                            best_obj = obj;
                            j = static_cast<std::ptrdiff_t>(t);
                        }
                    }
                }
            } else if (alpha[t] < C) {
                const double gd = gmax - grad[t];
                gmax2 = std::max(gmax2, -grad[t]);
                if (gd > 0) {
                    double quad = qd[iu] + qd[t] - 2.0 * ki[t];
                    quad = quad > 0 ? quad : kTau;
                    const double obj = -(gd * gd) / quad;
                    if (obj <= best_obj) {
                        best_obj = obj;
                        j = static_cast<std::ptrdiff_t>(t);
                    }
                }
            }
        }
        if (gmax + gmax2 < opts.tol || j < 0) {
            sol.converged = true;
            break;
        }
        const auto ju = static_cast<std::size_t>(j);
        const auto kj = cache.row(ju);
        const auto ki2 = cache.row(iu);  // cache may have evicted row i while fetching j

        const double qij = y[iu] * y[ju] * ki2[ju];
        const double old_ai = alpha[iu], old_aj = alpha[ju];
        if (y[iu] != y[ju]) {
            double quad = qd[iu] + qd[ju] + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[iu] - grad[ju]) / quad;
            const double diff = alpha[iu] - alpha[ju];
            alpha[iu] += delta;
            alpha[ju] += delta;
            if (diff > 0) {
                if (alpha[ju] < 0) { alpha[ju] = 0; alpha[iu] = diff; }
            } else if (alpha[iu] < 0) {
                alpha[iu] = 0;
                alpha[ju] = -diff;
            }
            if (diff > 0) {
                if (alpha[iu] > C) { alpha[iu] = C; alpha[ju] = C - diff; }
            } else if (alpha[ju] > C) {
                alpha[ju] = C;
                alpha[iu] = C + diff;
            }
        } else {
            double quad = qd[iu] + qd[ju] - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[iu] - grad[ju]) / quad;
            const double total = alpha[iu] + alpha[ju];
            alpha[iu] -= delta;
            alpha[ju] += delta;
            if (total > C) {
                if (alpha[iu] > C) { alpha[iu] = C; alpha[ju] = total - C; }
            } else if (alpha[ju] < 0) {
                alpha[ju] = 0;
                alpha[iu] = total;
            }
            if (total > C) {
                if (alpha[ju] > C) { alpha[ju] = C; alpha[iu] = total - C; }
            } else if (alpha[iu] < 0) {
                alpha[iu] = 0;
                alpha[ju] = total;
            }
        }

        const double dai = (alpha[iu] - old_ai) * y[iu];
        const double daj = (alpha[ju] - old_aj) * y[ju];
        for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (ki2[t] * dai + kj[t] * daj);

        ++sol.iterations;
        if (opts.record_objective) sol.objective_trace.push_back(dual_objective());
    }

    // bias from free vectors, else midpoint of the feasible interval
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    return sol;
}

KernelParams resolve_kernel(const SvmConfig& c, std::size_t dim) {
    KernelParams p;
    p.type = c.kernel;
    p.gamma = c.gamma.value_or(1.0 / static_cast<double>(dim));
    p.coef0 = c.coef0;
    p.degree = 3;
    return p;
}

Label vote(std::span<const Label> winners, int n_classes) {
    std::vector<int> votes(static_cast<std::size_t>(n_classes) + 1, 0);
    for (Label w : winners) ++votes[static_cast<std::size_t>(w)];
    Label best = 1;
    for (Label c = 2; c <= n_classes; ++c)
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    return best;
}

SvmModel::SvmModel(SvmConfig config, KernelParams kernel, Matrix support_vectors, std::vector<BinaryMachine> machines,
                   int n_classes, Exec exec)
    : config_(std::move(config)), kernel_(kernel), sv_(std::move(support_vectors)), machines_(std::move(machines)),
      n_classes_(n_classes), exec_(exec) {
    sv_norms_.resize(sv_.rows());
    kernels::serial::squared_norms(sv_, sv_norms_);
}

std::vector<double> SvmModel::decision_values(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw DimensionError("svm: query has dimension " + std::to_string(x.size()) + ", model has " +
                             std::to_string(dim()));
    }
    std::vector<double> k(sv_.rows());
    kernels::kernel_row(exec_, kernel_, sv_, sv_norms_, x, dot(x, x), k);
    std::vector<double> out;
    out.reserve(machines_.size());
    for (const auto& m : machines_) {
        double s = 0.0;
        for (std::size_t t = 0; t < m.sv.size(); ++t) s += m.coef[t] * k[m.sv[t]];
        out.push_back(s - m.rho);
    }
    return out;
}

Label SvmModel::predict(std::span<const double> x) const {
    const auto dec = decision_values(x);
    std::vector<Label> winners;
    winners.reserve(dec.size());
    for (std::size_t p = 0; p < dec.size(); ++p)
        winners.push_back(dec[p] > 0 ? machines_[p].positive : machines_[p].negative);
    return vote(winners, n_classes_);
}

TrainedModel svm_fit(const VectorDataset& train, const SvmConfig& config, const SmoOptions& opts) {
    if (train.empty()) throw Error("svm_fit: empty training set");
    if (!(config.C > 0.0)) throw Error("svm_fit: C must be positive");

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(train.n_classes()) + 1);
    for (std::size_t i = 0; i < train.size(); ++i) members[static_cast<std::size_t>(train.label(i))].push_back(i);
    std::vector<Label> present;
    for (Label c = 1; c <= train.n_classes(); ++c)
        if (!members[static_cast<std::size_t>(c)].empty()) present.push_back(c);
    if (present.size() < 2) return TrainedModel(ConstantModel{present.front(), train.dim(), train.n_classes()});

    const KernelParams kp = resolve_kernel(config, train.dim());
    std::vector<BinaryMachine> machines;
    std::map<std::size_t, std::size_t> sv_slot;  // training row -> support-vector row
    std::vector<std::size_t> sv_rows;

    for (std::size_t a = 0; a < present.size(); ++a) {
        for (std::size_t b = a + 1; b < present.size(); ++b) {
            const auto& pa = members[static_cast<std::size_t>(present[a])];
            const auto& pb = members[static_cast<std::size_t>(present[b])];
            std::vector<std::size_t> rows(pa);
            rows.insert(rows.end(), pb.begin(), pb.end());
            std::vector<double> values;
            values.reserve(rows.size() * train.dim());
            std::vector<double> y;
            y.reserve(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                auto f = train.features(rows[r]);
                values.insert(values.end(), f.begin(), f.end());
                y.push_back(r < pa.size() ? 1.0 : -1.0);
            }
            const MatrixView xv(values, rows.size(), train.dim());
            const auto sol = smo_solve(xv, y, kp, config.C, opts);

            BinaryMachine m;
            m.positive = present[a];
            m.negative = present[b];
            m.rho = sol.rho;
            m.iterations = sol.iterations;
            m.converged = sol.converged;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (sol.alpha[r] <= 0.0) continue;
                auto [it, inserted] = sv_slot.try_emplace(rows[r], sv_rows.size());
                if (inserted) sv_rows.push_back(rows[r]);
                m.sv.push_back(it->second);
                m.coef.push_back(sol.alpha[r] * y[r]);
            }
            machines.push_back(std::move(m));
        }
    }

    Matrix sv(sv_rows.size(), train.dim());
    for (std::size_t s = 0; s < sv_rows.size(); ++s) {
        auto f = train.features(sv_rows[s]);
        std::copy(f.begin(), f.end(), sv.row(s).begin());
    }
    TrainedModel model{SvmModel(config, kp, std::move(sv), std::move(machines), train.n_classes(), opts.exec)};
    for (const auto& m : model.as<SvmModel>().machines()) {
        if (!m.converged) {
            model.warnings.push_back("svm: pair " + std::to_string(m.positive) + "/" + std::to_string(m.negative) +
                                     " hit the iteration cap before converging");
        }
    }
    return model;
}

Label svm_predict(const TrainedModel& model, std::span<const double> x) {
    const auto k = model.kind();
    if (k != TrainedModel::Kind::Svm && k != TrainedModel::Kind::Constant)
        throw Error("svm_predict: model is neither an SVM nor a constant model");
    return model.predict(x);
}

}  // namespace locallearn
