#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ecsrep {

using complex = std::complex<double>;

// Thrown whenever amplitudes would be pushed past the truncation level by more
// than the adequacy budget (1e-9 in squared norm), or a state cannot be
// represented with the requested cutoff in the first place.
struct truncation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CatParity { even, odd };

// Dense multimode state on a uniform per-mode cutoff. Mode 0 varies slowest.
struct FockVector {
    std::size_t n_modes = 0;
    std::size_t dim = 0; // per-mode dimension, truncation N_max + 1
    std::vector<complex> amp;

    FockVector() = default;
    FockVector(std::size_t modes, std::size_t dim_per_mode);

    std::size_t size() const { return amp.size(); }
    std::size_t stride(std::size_t mode) const;
    std::size_t index(const std::vector<std::size_t>& occupation) const;
    complex at(const std::vector<std::size_t>& occupation) const;

    double norm_sq() const;
    void normalize();
    double mean_photon(std::size_t mode) const;
    // Total population with the given mode at its top level N_max.
    double top_level_population(std::size_t mode) const;
};

// Smallest cutoff N such that a Poisson(mean) tail beyond N stays below
// `tail`, floored at 12 so small-amplitude runs keep headroom for interference.
std::size_t n_max_for_mean(double mean, double tail = 1e-12);

FockVector coherent_state(complex alpha, std::size_t n_max);
FockVector cat_state(complex alpha, CatParity parity, std::size_t n_max);
FockVector tensor(const FockVector& a, const FockVector& b);
complex inner_product(const FockVector& a, const FockVector& b);

// Two-mode mixing in the real rotation convention: creation operators map as
//   a_i^+ -> cos(theta) a_i^+ + sin(theta) a_j^+
//   a_j^+ -> -sin(theta) a_i^+ + cos(theta) a_j^+
// so |alpha>_i |0>_j -> |alpha cos(theta)>_i |alpha sin(theta)>_j and the
// tapped fraction sin^2(theta) equals `transmissivity`. For a 50/50 combiner
// mode j carries the sum (d) and mode i the difference (d~).
FockVector beamsplitter(const FockVector& state, std::size_t mode_i,
                        std::size_t mode_j, double transmissivity);
// Signed-angle form; beamsplitter_angle(-theta) inverts beamsplitter_angle(theta).
FockVector beamsplitter_angle(const FockVector& state, std::size_t mode_i,
                              std::size_t mode_j, double theta);
// The phase-matched inverse device of beamsplitter(t): reversed traversal,
// i.e. the transposed rotation, whose cross coupling is the complementary way.
FockVector beamsplitter_inverse(const FockVector& state, std::size_t mode_i,
                                std::size_t mode_j, double transmissivity);

FockVector subtract_photon(const FockVector& state, std::size_t mode);

// ---------------------------------------------------------------------------

struct DensityOperator {
    std::size_t n_modes = 0;
    std::size_t dim = 0;
    Eigen::MatrixXcd mat;

    DensityOperator() = default;
    DensityOperator(std::size_t modes, std::size_t dim_per_mode);
    static DensityOperator from_pure(const FockVector& psi);

    std::size_t side() const { return static_cast<std::size_t>(mat.rows()); }
    std::size_t stride(std::size_t mode) const;
    double trace_real() const;
    double hermiticity_defect() const;
    double min_eigenvalue() const;
};

struct DetectionModel {
    double efficiency = 1.0;
    bool resolves_number = true;
};

struct DetectionOutcome {
    std::size_t count = 0;
    double probability = 0.0;
    DensityOperator state; // measured mode collapsed to |count>
};

// Beamsplitter to a vacuum ancilla at the given survival, ancilla traced out.
DensityOperator loss_channel(const DensityOperator& rho, std::size_t mode,
                             double survival);

// Efficiency-eta number-resolved POVM: loss at eta then an ideal projection.
std::vector<DetectionOutcome> detect_number(const DensityOperator& rho,
                                            std::size_t mode,
                                            const DetectionModel& model);

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::size_t>& keep_modes);

double von_neumann_entropy_bits(const DensityOperator& rho);
double fidelity_with_pure(const DensityOperator& rho, const FockVector& psi);

} // namespace ecsrep
