#pragma once

#include <cstdint>

#include "locallearn/dataset.hpp"

namespace locallearn {

/// Gaussian blobs with class structure inside each blob. A point is
/// blob center + per-(blob, class) offset + isotropic noise. Coordinates are
/// scaled by 1/sqrt(d), so the norms below hold in any dimension.
struct SynthSpec {
    std::size_t n = 6400;
    std::size_t d = 200;
    int classes = 4;
    int blobs = 8;
    double sigma = 0.5;         // expected noise norm
    double center_norm = 4.0;   // expected blob-center norm
    double offset_norm = 1.0;   // expected class-offset norm
    std::uint64_t seed = 1;

    void validate() const;
};

/// Instance i has class i % classes and blob (i / classes) % blobs, so classes
/// are balanced and every blob holds every class.
VectorDataset make_synthetic(const SynthSpec& spec);

}  // namespace locallearn
