#include "locallearn/synth.hpp"

#include <cmath>
#include <random>

#include "locallearn/rng.hpp"

namespace locallearn {

void SynthSpec::validate() const {
    if (d < 1) throw Error("synth: dimension must be at least 1");
    if (classes < 2) throw Error("synth: need at least 2 classes");
    if (blobs < 1) throw Error("synth: need at least 1 blob");
    if (n < static_cast<std::size_t>(classes) * static_cast<std::size_t>(blobs))
        throw Error("synth: n must be at least classes * blobs");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error("synth: sigma must be a finite non-negative number");
    if (!(center_norm >= 0.0) || !(offset_norm >= 0.0)) throw Error("synth: norms must be non-negative");
}

VectorDataset make_synthetic(const SynthSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, {seed_tag::synth}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d));
    const auto nb = static_cast<std::size_t>(spec.blobs), nc = static_cast<std::size_t>(spec.classes);

    Matrix centers(nb, spec.d);
    for (auto& v : centers.values()) v = spec.center_norm * scale * normal(rng);
    Matrix offsets(nb * nc, spec.d);
    for (auto& v : offsets.values()) v = spec.offset_norm * scale * normal(rng);

    VectorDataset data(spec.d, spec.classes);
    std::vector<double> x(spec.d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t c = i % nc;
        const std::size_t b = (i / nc) % nb;
        const auto center = centers.row(b);
        const auto offset = offsets.row(b * nc + c);
        for (std::size_t j = 0; j < spec.d; ++j) {
            const double noise = spec.sigma > 0.0 ? spec.sigma * scale * normal(rng) : 0.0;
            x[j] = center[j] + offset[j] + noise;
        }
        data.add("s" + std::to_string(i), x, static_cast<Label>(c + 1));
    }
    return data;
}

}  // namespace locallearn
