#include <sstream>

#include "locallearn/classifiers.hpp"
#include "locallearn/io.hpp"

namespace locallearn {

LearnerConfig default_config(LearnerKind kind) {
    if (kind == LearnerKind::Svm) return SvmConfig{};
    return KnnConfig{};
}

LearnerKind kind_of(const LearnerConfig& c) {
    return std::holds_alternative<SvmConfig>(c) ? LearnerKind::Svm : LearnerKind::Knn;
}

std::string describe(const KnnConfig& c) {
    return "n_neighbors=" + std::to_string(c.n_neighbors) + " weights=" + knn_weights_name(c.weights);
}

std::string describe(const SvmConfig& c) {
    return "C=" + format_double(c.C) + " kernel=" + kernel_name(c.kernel) +
           " gamma=" + (c.gamma ? format_double(*c.gamma) : std::string("auto")) + " coef0=" + format_double(c.coef0);
}

std::string describe(const LearnerConfig& c) {
    return std::visit([](const auto& v) { return describe(v); }, c);
}

TrainedModel::Kind TrainedModel::kind() const {
    switch (impl_.index()) {
        case 0: return Kind::Knn;
        case 1: return Kind::Svm;
        default: return Kind::Constant;
    }
}

std::size_t TrainedModel::dim() const {
    return std::visit(
        [](const auto& m) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConstantModel>) return m.dim;
            else return m.dim();
        },
        impl_);
}

int TrainedModel::n_classes() const {
    return std::visit(
        [](const auto& m) -> int {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConstantModel>) return m.n_classes;
            else return m.n_classes();
        },
        impl_);
}

Label TrainedModel::predict(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw DimensionError("predict: point has dimension " + std::to_string(x.size()) + ", model expects " +
                             std::to_string(dim()));
    }
    return std::visit(
        [&](const auto& m) -> Label {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConstantModel>) return m.label;
            else return m.predict(x);
        },
        impl_);
}

std::vector<Label> TrainedModel::predict(MatrixView rows, Exec exec) const {
    if (rows.rows > 0 && rows.cols != dim()) {
        throw DimensionError("predict: points have dimension " + std::to_string(rows.cols) + ", model expects " +
                             std::to_string(dim()));
    }
    std::vector<Label> out(rows.rows);
    const auto n = static_cast<std::ptrdiff_t>(rows.rows);
#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::Parallel && n > 64)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = predict(rows.row(static_cast<std::size_t>(i)));
    return out;
}

TrainedModel fit_learner(const VectorDataset& train, const LearnerConfig& config, Exec exec) {
    if (const auto* s = std::get_if<SvmConfig>(&config)) {
        SmoOptions o;
        o.exec = exec;
        return svm_fit(train, *s, o);
    }
    return knn_fit(train, std::get<KnnConfig>(config), exec);
}

// ---------------------------------------------------------------------------
// Text serialization

namespace {

void append_row(std::string& out, std::span<const double> r) {
    for (double v : r) {
        out += ' ';
        out += format_double(v);
    }
}

std::string next_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw ParseError(std::string("model: truncated input reading ") + what);
    return tok;
}

std::string field(std::istream& in, const std::string& key) {
    auto tok = next_token(in, key.c_str());
    auto eq = tok.find('=');
    if (eq == std::string::npos || tok.substr(0, eq) != key)
        throw ParseError("model: expected field '" + key + "', got '" + tok + "'");
    return tok.substr(eq + 1);
}

double number(std::istream& in, const char* what) { return std::stod(next_token(in, what)); }

}  // namespace

std::string format_model(const TrainedModel& m) {
    std::string out;
    switch (m.kind()) {
        case TrainedModel::Kind::Constant: {
            const auto& c = m.as<ConstantModel>();
            out = "model constant\nlabel=" + std::to_string(c.label) + " classes=" + std::to_string(c.n_classes) +
                  " dim=" + std::to_string(c.dim) + "\n";
            break;
        }
        case TrainedModel::Kind::Knn: {
            const auto& k = m.as<KnnModel>();
            out = "model knn\nn_neighbors=" + std::to_string(k.config().n_neighbors) +
                  " weights=" + knn_weights_name(k.config().weights) + " classes=" + std::to_string(k.n_classes()) +
                  " dim=" + std::to_string(k.dim()) + " count=" + std::to_string(k.points().rows()) + "\n";
            for (std::size_t i = 0; i < k.points().rows(); ++i) {
                out += std::to_string(k.labels()[i]);
                append_row(out, k.points().row(i));
                out += '\n';
            }
            break;
        }
        case TrainedModel::Kind::Svm: {
            const auto& s = m.as<SvmModel>();
            const auto& c = s.config();
            out = "model svm\nC=" + format_double(c.C) + " kernel=" + kernel_name(c.kernel) +
                  " gamma=" + (c.gamma ? format_double(*c.gamma) : std::string("auto")) +
                  " coef0=" + format_double(c.coef0) + " classes=" + std::to_string(s.n_classes()) +
                  " dim=" + std::to_string(s.dim()) + " sv=" + std::to_string(s.support_vectors().rows()) +
                  " machines=" + std::to_string(s.machines().size()) + "\n";
            for (std::size_t i = 0; i < s.support_vectors().rows(); ++i) {
                out += "v";
                append_row(out, s.support_vectors().row(i));
                out += '\n';
            }
            for (const auto& mc : s.machines()) {
                out += "machine " + std::to_string(mc.positive) + " " + std::to_string(mc.negative) + " " +
                       format_double(mc.rho) + " " + std::to_string(mc.sv.size()) + "\n";
                for (std::size_t t = 0; t < mc.sv.size(); ++t) {
                    out += std::to_string(mc.sv[t]) + " " + format_double(mc.coef[t]) + "\n";
                }
            }
            break;
        }
    }
    return out;
}

TrainedModel parse_model(const std::string& text) {
    std::istringstream in(text);
    if (next_token(in, "header") != "model") throw ParseError("model: missing 'model' header");
    const auto kind = next_token(in, "kind");
    if (kind == "constant") {
        ConstantModel c;
        c.label = std::stoi(field(in, "label"));
        c.n_classes = std::stoi(field(in, "classes"));
        c.dim = std::stoul(field(in, "dim"));
        return TrainedModel(c);
    }
    if (kind == "knn") {
        KnnConfig cfg;
        cfg.n_neighbors = std::stoi(field(in, "n_neighbors"));
        cfg.weights = parse_knn_weights(field(in, "weights"));
        const int classes = std::stoi(field(in, "classes"));
        const auto dim = std::stoul(field(in, "dim"));
        const auto count = std::stoul(field(in, "count"));
        Matrix pts(count, dim);
        std::vector<Label> labels(count);
        for (std::size_t i = 0; i < count; ++i) {
            labels[i] = std::stoi(next_token(in, "label"));
            for (auto& v : pts.row(i)) v = number(in, "knn row");
        }
        return TrainedModel(KnnModel(std::move(pts), std::move(labels), classes, cfg, Exec::Parallel));
    }
    if (kind == "svm") {
        SvmConfig cfg;
        cfg.C = std::stod(field(in, "C"));
        cfg.kernel = parse_kernel(field(in, "kernel"));
        const auto g = field(in, "gamma");
        if (g != "auto") cfg.gamma = std::stod(g);
        cfg.coef0 = std::stod(field(in, "coef0"));
        const int classes = std::stoi(field(in, "classes"));
        const auto dim = std::stoul(field(in, "dim"));
        const auto nsv = std::stoul(field(in, "sv"));
        const auto nm = std::stoul(field(in, "machines"));
        Matrix sv(nsv, dim);
        for (std::size_t i = 0; i < nsv; ++i) {
            if (next_token(in, "sv tag") != "v") throw ParseError("model: expected support vector row");
            for (auto& v : sv.row(i)) v = number(in, "sv row");
        }
        std::vector<BinaryMachine> machines(nm);
        for (auto& mc : machines) {
            if (next_token(in, "machine tag") != "machine") throw ParseError("model: expected 'machine' line");
            mc.positive = std::stoi(next_token(in, "positive"));
            mc.negative = std::stoi(next_token(in, "negative"));
            mc.rho = number(in, "rho");
            const auto count = std::stoul(next_token(in, "count"));
            for (std::size_t t = 0; t < count; ++t) {
                const auto slot = std::stoul(next_token(in, "slot"));
                if (slot >= nsv) throw ParseError("model: support vector index out of range");
                mc.sv.push_back(slot);
                mc.coef.push_back(number(in, "coef"));
            }
        }
        return TrainedModel(
            SvmModel(cfg, resolve_kernel(cfg, dim), std::move(sv), std::move(machines), classes, Exec::Parallel));
    }
    throw ParseError("model: unknown kind '" + kind + "'");
}

}  // namespace locallearn
