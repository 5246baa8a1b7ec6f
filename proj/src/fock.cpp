#include "ecsrep/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace ecsrep {

namespace {

// Squared norm allowed to spill past the cutoff before an operation is
// declared truncation-inadequate.
constexpr double k_spill_budget = 1e-9;
constexpr std::size_t k_amplitude_budget = std::size_t{1} << 27;

std::size_t checked_size(std::size_t n_modes, std::size_t dim) {
    if (n_modes == 0 || dim == 0)
        throw std::invalid_argument("FockVector: need at least one mode and one level");
    std::size_t size = 1;
    for (std::size_t m = 0; m < n_modes; ++m) {
        if (size > k_amplitude_budget / dim)
            throw std::length_error("FockVector: amplitude array exceeds the 2^27 budget");
        size *= dim;
    }
    return size;
}

std::vector<long double> binomial_row_table(std::size_t n_top) {
    // b[n*(n+1)/2 + k] = C(n, k), flattened triangle
    std::vector<long double> b((n_top + 1) * (n_top + 2) / 2, 0.0L);
    auto at = [&](std::size_t n, std::size_t k) -> long double& {
        return b[n * (n + 1) / 2 + k];
    };
    at(0, 0) = 1.0L;
    for (std::size_t n = 1; n <= n_top; ++n) {
        at(n, 0) = at(n, n) = 1.0L;
        for (std::size_t k = 1; k < n; ++k)
            at(n, k) = at(n - 1, k - 1) + at(n - 1, k);
    }
    return b;
}

std::vector<long double> log_factorial_table(std::size_t n_top) {
    std::vector<long double> lf(n_top + 1, 0.0L);
    for (std::size_t n = 1; n <= n_top; ++n)
        lf[n] = lf[n - 1] + std::log(static_cast<long double>(n));
    return lf;
}

} // namespace

FockVector::FockVector(std::size_t modes, std::size_t dim_per_mode)
    : n_modes(modes), dim(dim_per_mode), amp(checked_size(modes, dim_per_mode)) {
    amp[0] = 1.0; // vacuum
}

std::size_t FockVector::stride(std::size_t mode) const {
    if (mode >= n_modes) throw std::out_of_range("FockVector: mode index");
    std::size_t s = 1;
    for (std::size_t m = mode + 1; m < n_modes; ++m) s *= dim;
    return s;
}

std::size_t FockVector::index(const std::vector<std::size_t>& occupation) const {
    if (occupation.size() != n_modes)
        throw std::invalid_argument("FockVector: occupation length mismatch");
    std::size_t idx = 0;
    for (std::size_t m = 0; m < n_modes; ++m) {
        if (occupation[m] >= dim) throw std::out_of_range("FockVector: occupation level");
        idx = idx * dim + occupation[m];
    }
    return idx;
}

complex FockVector::at(const std::vector<std::size_t>& occupation) const {
    return amp[index(occupation)];
}

double FockVector::norm_sq() const {
    long double n = 0.0L;
    for (const complex& a : amp) n += std::norm(a);
    return static_cast<double>(n);
}

void FockVector::normalize() {
    const double n = norm_sq();
    if (n <= 0.0) throw std::domain_error("FockVector: cannot normalize zero vector");
    const double inv = 1.0 / std::sqrt(n);
    for (complex& a : amp) a *= inv;
}

double FockVector::mean_photon(std::size_t mode) const {
    const std::size_t st = stride(mode);
    long double mean = 0.0L;
    for (std::size_t i = 0; i < amp.size(); ++i)
        mean += static_cast<long double>((i / st) % dim) * std::norm(amp[i]);
    return static_cast<double>(mean);
}

double FockVector::top_level_population(std::size_t mode) const {
    const std::size_t st = stride(mode);
    long double pop = 0.0L;
    for (std::size_t i = 0; i < amp.size(); ++i)
        if ((i / st) % dim == dim - 1) pop += std::norm(amp[i]);
    return static_cast<double>(pop);
}

std::size_t n_max_for_mean(double mean, double tail) {
    constexpr std::size_t floor_n = 12;
    if (!(mean > 0.0)) return floor_n;
    double term = std::exp(-mean);
    double cum = term;
    std::size_t n = 0;
    while (1.0 - cum >= tail && n < 400) {
        ++n;
        term *= mean / static_cast<double>(n);
        cum += term;
    }
    return std::max(n, floor_n);
}

FockVector coherent_state(complex alpha, std::size_t n_max) {
    FockVector v(1, n_max + 1);
    const double mean = std::norm(alpha);
    complex c = std::exp(complex(-mean / 2.0, 0.0));
    long double captured = 0.0L;
    for (std::size_t n = 0; n <= n_max; ++n) {
        if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
        v.amp[n] = c;
        captured += std::norm(c);
    }
    const double tail = 1.0 - static_cast<double>(captured);
    if (tail > 1e-12) {
        std::ostringstream msg;
        msg << "coherent_state: cutoff N=" << n_max << " leaves Poisson tail "
            << tail << " at mean " << mean;
        throw truncation_error(msg.str());
    }
    v.normalize();
    return v;
}

FockVector cat_state(complex alpha, CatParity parity, std::size_t n_max) {
    const FockVector plus = coherent_state(alpha, n_max);
    const FockVector minus = coherent_state(-alpha, n_max);
    FockVector v(1, n_max + 1);
    const double sign = (parity == CatParity::even) ? 1.0 : -1.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        const bool keep = (parity == CatParity::even) ? (n % 2 == 0) : (n % 2 == 1);
        v.amp[n] = keep ? plus.amp[n] + sign * minus.amp[n] : complex(0.0);
    }
    if (v.norm_sq() < 1e-28)
        throw std::domain_error("cat_state: odd-parity cat is undefined at alpha = 0");
    v.normalize();
    return v;
}

FockVector tensor(const FockVector& a, const FockVector& b) {
    if (a.dim != b.dim)
        throw std::invalid_argument("tensor: per-mode dimensions differ");
    FockVector out(a.n_modes + b.n_modes, a.dim);
    for (std::size_t ia = 0; ia < a.size(); ++ia) {
        if (a.amp[ia] == complex(0.0)) {
            std::fill_n(out.amp.begin() + ia * b.size(), b.size(), complex(0.0));
            continue;
        }
        for (std::size_t ib = 0; ib < b.size(); ++ib)
            out.amp[ia * b.size() + ib] = a.amp[ia] * b.amp[ib];
    }
    return out;
}

complex inner_product(const FockVector& a, const FockVector& b) {
    if (a.n_modes != b.n_modes || a.dim != b.dim)
        throw std::invalid_argument("inner_product: shape mismatch");
    std::complex<long double> acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::conj(std::complex<long double>(a.amp[i])) *
               std::complex<long double>(b.amp[i]);
    return complex(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
}

FockVector beamsplitter_angle(const FockVector& in, std::size_t mode_i,
                              std::size_t mode_j, double theta) {
    if (mode_i >= in.n_modes || mode_j >= in.n_modes || mode_i == mode_j)
        throw std::invalid_argument("beamsplitter: invalid mode pair");

    const std::size_t d = in.dim;
    const std::size_t n_top = 2 * (d - 1);
    const long double c = std::cos(static_cast<long double>(theta));
    const long double s = std::sin(static_cast<long double>(theta));

    const std::vector<long double> binom = binomial_row_table(n_top);
    auto choose = [&](std::size_t n, std::size_t k) { return binom[n * (n + 1) / 2 + k]; };
    const std::vector<long double> lf = log_factorial_table(n_top);
    std::vector<long double> cpow(n_top + 1), spow(n_top + 1);
    cpow[0] = spow[0] = 1.0L;
    for (std::size_t k = 1; k <= n_top; ++k) {
        cpow[k] = cpow[k - 1] * c;
        spow[k] = spow[k - 1] * s;
    }

    // block[N][p*(N+1)+k] = <p, N-p | U | k, N-k>, built on first use per N.
    std::vector<std::vector<long double>> block(n_top + 1);
    auto transfer = [&](std::size_t total) -> const std::vector<long double>& {
        std::vector<long double>& a = block[total];
        if (!a.empty()) return a;
        a.assign((total + 1) * (total + 1), 0.0L);
        for (std::size_t k = 0; k <= total; ++k) {
            const std::size_t l = total - k;
            for (std::size_t p = 0; p <= total; ++p) {
                const std::size_t j_lo = (p > l) ? p - l : 0;
                const std::size_t j_hi = std::min(k, p);
                if (j_lo > j_hi) continue;
                long double sum = 0.0L;
                for (std::size_t j = j_lo; j <= j_hi; ++j) {
                    long double term = choose(k, j) * choose(l, p - j) *
                                       cpow[l - p + 2 * j] * spow[k + p - 2 * j];
                    if ((p - j) % 2 == 1) term = -term;
                    sum += term;
                }
                const long double pref =
                    std::exp(0.5L * (lf[p] + lf[total - p] - lf[k] - lf[l]));
                a[p * (total + 1) + k] = pref * sum;
            }
        }
        return a;
    };

    FockVector out(in.n_modes, d);
    out.amp[0] = 0.0;
    const std::size_t si = in.stride(mode_i);
    const std::size_t sj = in.stride(mode_j);
    std::vector<std::complex<long double>> x(d), y(n_top + 1);
    long double spilled = 0.0L;

    for (std::size_t base = 0; base < in.size(); ++base) {
        if ((base / si) % d != 0 || (base / sj) % d != 0) continue;
        for (std::size_t total = 0; total <= n_top; ++total) {
            const std::size_t k_lo = (total >= d) ? total - (d - 1) : 0;
            const std::size_t k_hi = std::min(total, d - 1);
            bool any = false;
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                const complex a = in.amp[base + k * si + (total - k) * sj];
                x[k] = a;
                any = any || (a != complex(0.0));
            }
            if (!any) continue;
            const std::vector<long double>& a = transfer(total);
            for (std::size_t p = 0; p <= total; ++p) {
                std::complex<long double> acc = 0.0L;
                for (std::size_t k = k_lo; k <= k_hi; ++k)
                    acc += a[p * (total + 1) + k] * x[k];
                if (p <= d - 1 && total - p <= d - 1) {
                    out.amp[base + p * si + (total - p) * sj] =
                        complex(static_cast<double>(acc.real()),
                                static_cast<double>(acc.imag()));
                } else {
                    spilled += std::norm(acc);
                }
            }
        }
    }

    if (static_cast<double>(spilled) > k_spill_budget) {
        std::ostringstream msg;
        msg << "beamsplitter: " << static_cast<double>(spilled)
            << " of squared norm pushed past cutoff N=" << d - 1;
        throw truncation_error(msg.str());
    }
    return out;
}

FockVector beamsplitter(const FockVector& state, std::size_t mode_i,
                        std::size_t mode_j, double transmissivity) {
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
        throw std::invalid_argument("beamsplitter: transmissivity outside [0,1]");
    return beamsplitter_angle(state, mode_i, mode_j,
                              std::asin(std::sqrt(transmissivity)));
}

FockVector beamsplitter_inverse(const FockVector& state, std::size_t mode_i,
                                std::size_t mode_j, double transmissivity) {
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
        throw std::invalid_argument("beamsplitter: transmissivity outside [0,1]");
    return beamsplitter_angle(state, mode_i, mode_j,
                              -std::asin(std::sqrt(transmissivity)));
}

FockVector subtract_photon(const FockVector& in, std::size_t mode) {
    const std::size_t st = in.stride(mode);
    FockVector out(in.n_modes, in.dim);
    out.amp[0] = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const std::size_t n = (i / st) % in.dim;
        if (n == 0) continue;
        out.amp[i - st] = std::sqrt(static_cast<double>(n)) * in.amp[i];
    }
    if (out.norm_sq() < 1e-20)
        throw std::domain_error("subtract_photon: mode carries no excitation");
    out.normalize();
    return out;
}

// ---------------------------------------------------------------------------

DensityOperator::DensityOperator(std::size_t modes, std::size_t dim_per_mode)
    : n_modes(modes), dim(dim_per_mode) {
    const std::size_t side = checked_size(modes, dim_per_mode);
    if (side > 4096)
        throw std::length_error("DensityOperator: side exceeds 4096");
    mat = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(side),
                                 static_cast<Eigen::Index>(side));
}

DensityOperator DensityOperator::from_pure(const FockVector& psi) {
    DensityOperator rho(psi.n_modes, psi.dim);
    const Eigen::Map<const Eigen::VectorXcd> v(psi.amp.data(),
                                               static_cast<Eigen::Index>(psi.size()));
    rho.mat = v * v.adjoint();
    return rho;
}

std::size_t DensityOperator::stride(std::size_t mode) const {
    if (mode >= n_modes) throw std::out_of_range("DensityOperator: mode index");
    std::size_t s = 1;
    for (std::size_t m = mode + 1; m < n_modes; ++m) s *= dim;
    return s;
}

double DensityOperator::trace_real() const { return mat.trace().real(); }

double DensityOperator::hermiticity_defect() const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
    const Eigen::MatrixXcd sym = 0.5 * (mat + mat.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym,
                                                           Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

DensityOperator loss_channel(const DensityOperator& rho, std::size_t mode,
                             double survival) {
    if (!(survival >= 0.0 && survival <= 1.0))
        throw std::invalid_argument("loss_channel: survival outside [0,1]");
    const std::size_t d = rho.dim;
    const std::size_t st = rho.stride(mode);
    const std::size_t side = rho.side();

    // kraus[n][l] = ||K_l |n>|| = sqrt(C(n,l) eta^(n-l) (1-eta)^l)
    std::vector<std::vector<double>> kraus(d, std::vector<double>(d, 0.0));
    const std::vector<long double> binom = binomial_row_table(d - 1);
    for (std::size_t n = 0; n < d; ++n)
        for (std::size_t l = 0; l <= n; ++l)
            kraus[n][l] = std::sqrt(static_cast<double>(binom[n * (n + 1) / 2 + l]) *
                                    std::pow(survival, static_cast<double>(n - l)) *
                                    std::pow(1.0 - survival, static_cast<double>(l)));

    std::vector<std::size_t> level(side);
    for (std::size_t i = 0; i < side; ++i) level[i] = (i / st) % d;

    DensityOperator out(rho.n_modes, rho.dim);
    for (std::size_t l = 0; l < d; ++l) {
        if (l > 0 && survival == 1.0) break;
        for (std::size_t r = 0; r < side; ++r) {
            if (level[r] < l) continue;
            const double kr = kraus[level[r]][l];
            if (kr == 0.0) continue;
            for (std::size_t cidx = 0; cidx < side; ++cidx) {
                if (level[cidx] < l) continue;
                const complex v = rho.mat(static_cast<Eigen::Index>(r),
                                          static_cast<Eigen::Index>(cidx));
                if (v == complex(0.0)) continue;
                out.mat(static_cast<Eigen::Index>(r - l * st),
                        static_cast<Eigen::Index>(cidx - l * st)) +=
                    kr * kraus[level[cidx]][l] * v;
            }
        }
    }
    return out;
}

std::vector<DetectionOutcome> detect_number(const DensityOperator& rho,
                                            std::size_t mode,
                                            const DetectionModel& model) {
    if (!model.resolves_number)
        throw std::invalid_argument("detect_number: threshold detectors not modeled");
    const DensityOperator lossy = loss_channel(rho, mode, model.efficiency);
    const std::size_t d = rho.dim;
    const std::size_t st = rho.stride(mode);
    const std::size_t side = rho.side();

    std::vector<DetectionOutcome> outcomes;
    outcomes.reserve(d);
    for (std::size_t n = 0; n < d; ++n) {
        DetectionOutcome o;
        o.count = n;
        o.state = DensityOperator(rho.n_modes, rho.dim);
        long double p = 0.0L;
        for (std::size_t r = 0; r < side; ++r) {
            if ((r / st) % d != n) continue;
            p += lossy.mat(static_cast<Eigen::Index>(r),
                           static_cast<Eigen::Index>(r)).real();
            for (std::size_t cidx = 0; cidx < side; ++cidx) {
                if ((cidx / st) % d != n) continue;
                o.state.mat(static_cast<Eigen::Index>(r),
                            static_cast<Eigen::Index>(cidx)) =
                    lossy.mat(static_cast<Eigen::Index>(r),
                              static_cast<Eigen::Index>(cidx));
            }
        }
        o.probability = static_cast<double>(p);
        if (o.probability > 1e-15)
            o.state.mat /= o.probability;
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::size_t>& keep_modes) {
    std::vector<bool> keep(rho.n_modes, false);
    for (std::size_t m : keep_modes) {
        if (m >= rho.n_modes) throw std::out_of_range("partial_trace: mode index");
        if (keep[m]) throw std::invalid_argument("partial_trace: repeated mode");
        keep[m] = true;
    }
    if (keep_modes.empty())
        throw std::invalid_argument("partial_trace: must keep at least one mode");

    const std::size_t side = rho.side();
    std::vector<std::uint32_t> kept_part(side), dropped_part(side);
    // Digit weights; mode 0 stays slowest in both the input and the output.
    std::vector<std::size_t> kept_weight(rho.n_modes, 0), drop_weight(rho.n_modes, 0);
    {
        std::size_t wk = 1, wd = 1;
        for (std::size_t m = rho.n_modes; m-- > 0;) {
            if (keep[m]) {
                kept_weight[m] = wk;
                wk *= rho.dim;
            } else {
                drop_weight[m] = wd;
                wd *= rho.dim;
            }
        }
    }
    for (std::size_t i = 0; i < side; ++i) {
        std::size_t k = 0, dr = 0;
        for (std::size_t m = 0; m < rho.n_modes; ++m) {
            const std::size_t occ = (i / rho.stride(m)) % rho.dim;
            if (keep[m])
                k += occ * kept_weight[m];
            else
                dr += occ * drop_weight[m];
        }
        kept_part[i] = static_cast<std::uint32_t>(k);
        dropped_part[i] = static_cast<std::uint32_t>(dr);
    }

    DensityOperator out(keep_modes.size(), rho.dim);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t cidx = 0; cidx < side; ++cidx)
            if (dropped_part[r] == dropped_part[cidx])
                out.mat(kept_part[r], kept_part[cidx]) +=
                    rho.mat(static_cast<Eigen::Index>(r),
                            static_cast<Eigen::Index>(cidx));
    return out;
}

double von_neumann_entropy_bits(const DensityOperator& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.mat,
                                                           Eigen::EigenvaluesOnly);
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double lambda = solver.eigenvalues()(i);
        if (lambda > 1e-15) entropy -= lambda * std::log2(lambda);
    }
    return entropy;
}

double fidelity_with_pure(const DensityOperator& rho, const FockVector& psi) {
    if (psi.n_modes != rho.n_modes || psi.dim != rho.dim)
        throw std::invalid_argument("fidelity_with_pure: shape mismatch");
    const Eigen::Map<const Eigen::VectorXcd> v(psi.amp.data(),
                                               static_cast<Eigen::Index>(psi.size()));
    return (v.adjoint() * rho.mat * v)(0, 0).real();
}

} // namespace ecsrep
