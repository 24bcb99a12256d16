#pragma once

// Multivariate counting processes driven by tempered stable and gamma
// subordination: pgfs, pmfs (double series with transform-inversion
// fallback), Levy mass of the compound representation, semigroup transition
// weights, generator residual diagnostics, and exact samplers for terminal
// counts and event paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fraccount/rng.hpp"
#include "fraccount/series.hpp"
#include "fraccount/specfun.hpp"
#include "fraccount/subordinators.hpp"

namespace fraccount {

using CountVector = std::vector<std::uint64_t>;

inline std::uint64_t total_count(const CountVector& k) {
    std::uint64_t s = 0;
    for (std::uint64_t v : k) s += v;
    return s;
}

// Marked process parameters: per-component Poisson rates, the tempered
// stable clock, and an optional gamma layer (present = negative binomial
// type mixing, absent = pure tempered space-fractional type).
struct ProcessParams {
    std::vector<double> lambdas;
    TssParams tss;
    std::optional<GammaParams> gamma;

    std::size_t dimension() const { return lambdas.size(); }

    double total_rate() const {
        double s = 0.0;
        for (double l : lambdas) s += l;
        return s;
    }

    void validate() const {
        if (lambdas.empty()) throw domain_error("ProcessParams: need at least one component rate");
        for (double l : lambdas) {
            if (!(l > 0.0) || !std::isfinite(l))
                throw domain_error("ProcessParams: component rates must be positive and finite");
        }
        tss.validate();
        if (gamma) gamma->validate();
    }
};

// ---------------------------------------------------------------------------
// Probability generating functions
// ---------------------------------------------------------------------------

namespace detail {

inline void check_pgf_args(const std::vector<std::complex<double>>& u, double t,
                           const ProcessParams& p) {
    p.validate();
    if (u.size() != p.dimension())
        throw domain_error("pgf: argument dimension does not match process dimension");
    if (!(t >= 0.0) || !std::isfinite(t)) throw domain_error("pgf: time must be >= 0");
    for (const auto& ui : u) {
        if (std::abs(ui) > 1.0 + 1e-9)
            throw domain_error("pgf: arguments must lie in the closed unit polydisc");
    }
}

inline std::complex<double> pgf_argument(const std::vector<std::complex<double>>& u,
                                         const ProcessParams& p) {
    std::complex<double> z = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) z += p.lambdas[i] * (1.0 - u[i]);
    return z;
}

}  // namespace detail

// E prod u_i^{N_i(t)} = exp(-t psi_tss(sum lambda_i (1 - u_i))).
inline std::complex<double> pgf_mtsfpp(const std::vector<std::complex<double>>& u, double t,
                                       const ProcessParams& p) {
    detail::check_pgf_args(u, t, p);
    return std::exp(-t * laplace_exponent_tss(detail::pgf_argument(u, p), p.tss));
}

// Gamma-mixed version: exp(-t rho log(1 + psi_tss(z)/mu)).
inline std::complex<double> pgf_mtsfnbp(const std::vector<std::complex<double>>& u, double t,
                                        const ProcessParams& p) {
    detail::check_pgf_args(u, t, p);
    if (!p.gamma) throw domain_error("pgf_mtsfnbp: process has no gamma layer");
    return std::exp(-t * laplace_exponent_composed(detail::pgf_argument(u, p), p.tss, *p.gamma));
}

inline double pgf_mtsfpp(const std::vector<double>& u, double t, const ProcessParams& p) {
    std::vector<std::complex<double>> uc(u.begin(), u.end());
    return pgf_mtsfpp(uc, t, p).real();
}

inline double pgf_mtsfnbp(const std::vector<double>& u, double t, const ProcessParams& p) {
    std::vector<std::complex<double>> uc(u.begin(), u.end());
    return pgf_mtsfnbp(uc, t, p).real();
}

// Braced real arguments would otherwise be ambiguous against the complex
// overloads, since complex is constructible from double.
inline double pgf_mtsfpp(std::initializer_list<double> u, double t, const ProcessParams& p) {
    return pgf_mtsfpp(std::vector<double>(u), t, p);
}

inline double pgf_mtsfnbp(std::initializer_list<double> u, double t, const ProcessParams& p) {
    return pgf_mtsfnbp(std::vector<double>(u), t, p);
}

using PgfHandle =
    std::function<std::complex<double>(const std::vector<std::complex<double>>&, double)>;

inline PgfHandle make_pgf_mtsfpp(ProcessParams p) {
    p.validate();
    return [p = std::move(p)](const std::vector<std::complex<double>>& u, double t) {
        return pgf_mtsfpp(u, t, p);
    };
}

inline PgfHandle make_pgf_mtsfnbp(ProcessParams p) {
    p.validate();
    if (!p.gamma) throw domain_error("make_pgf_mtsfnbp: process has no gamma layer");
    return [p = std::move(p)](const std::vector<std::complex<double>>& u, double t) {
        return pgf_mtsfnbp(u, t, p);
    };
}

// ---------------------------------------------------------------------------
// Transform inversion on the torus
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::complex<double>> unit_roots(std::size_t M) {
    std::vector<std::complex<double>> w(M);
    const double step = 2.0 * std::numbers::pi_v<double> / static_cast<double>(M);
    for (std::size_t l = 0; l < M; ++l)
        w[l] = {std::cos(step * static_cast<double>(l)), std::sin(step * static_cast<double>(l))};
    return w;
}

inline std::size_t checked_grid_cells(std::size_t M, std::size_t m) {
    if (M < 2) throw domain_error("inversion: grid size must be >= 2");
    if (m == 0 || m > 3) throw domain_error("inversion: dimension must be 1..3");
    double cells = std::pow(static_cast<double>(M), static_cast<double>(m));
    if (cells > 67108864.0) throw domain_error("inversion: grid has more than 2^26 cells");
    std::size_t n = 1;
    for (std::size_t i = 0; i < m; ++i) n *= M;
    return n;
}

// Single pmf entry by direct summation over the full torus grid:
// pmf(k) = M^-m sum_j pgf(w^j, t) w^{-j.k}.
inline std::complex<double> inversion_entry(const CountVector& k, double t, const PgfHandle& pgf,
                                            std::size_t M) {
    const std::size_t m = k.size();
    const std::size_t cells = checked_grid_cells(M, m);
    const auto roots = unit_roots(M);
    std::vector<std::size_t> idx(m, 0);
    std::vector<std::complex<double>> u(m, roots[0]);
    CompensatedSum re, im;
    for (std::size_t flat = 0; flat < cells; ++flat) {
        std::size_t phase = 0;
        for (std::size_t i = 0; i < m; ++i) phase += idx[i] * static_cast<std::size_t>(k[i] % M);
        const std::complex<double> term = pgf(u, t) * std::conj(roots[phase % M]);
        re.add(term.real());
        im.add(term.imag());
        for (std::size_t i = m; i-- > 0;) {
            if (++idx[i] < M) {
                u[i] = roots[idx[i]];
                break;
            }
            idx[i] = 0;
            u[i] = roots[0];
        }
    }
    const double norm = static_cast<double>(cells);
    return {re.value() / norm, im.value() / norm};
}

}  // namespace detail

struct InversionDiagnostics {
    double value = 0.0;
    double imag_residue = 0.0;
    double doubling_diff = 0.0;
    std::size_t evaluations = 0;
};

// Inverts the pgf on the torus at grid size M and again at 2M. The doubling
// drift bounds the wrapped-tail aliasing; the default budget suits tempered
// (geometrically decaying) pmfs, while power-tail cases (theta = 0) need an
// explicit budget matched to their aliasing level.
inline InversionDiagnostics pmf_by_inversion_diagnostic(const CountVector& k, double t,
                                                        const PgfHandle& pgf, std::size_t M = 128,
                                                        double doubling_tol = 1e-12) {
    if (k.empty()) throw domain_error("inversion: empty count vector");
    for (std::uint64_t ki : k) {
        if (ki >= M) throw domain_error("inversion: grid size must exceed every count component");
    }
    const std::complex<double> coarse = detail::inversion_entry(k, t, pgf, M);
    const std::complex<double> fine = detail::inversion_entry(k, t, pgf, 2 * M);
    InversionDiagnostics d;
    d.imag_residue = std::max(std::abs(coarse.imag()), std::abs(fine.imag()));
    d.doubling_diff = std::abs(coarse.real() - fine.real());
    d.value = fine.real();
    std::size_t cm = 1, cf = 1;
    for (std::size_t i = 0; i < k.size(); ++i) {
        cm *= M;
        cf *= 2 * M;
    }
    d.evaluations = cm + cf;
    if (d.imag_residue > 1e-10)
        throw consistency_error("inversion: imaginary residue " + std::to_string(d.imag_residue) +
                                " exceeds 1e-10");
    if (d.doubling_diff > doubling_tol)
        throw consistency_error("inversion: doubling the grid moved the value by " +
                                std::to_string(d.doubling_diff) + ", budget " +
                                std::to_string(doubling_tol));
    return d;
}

inline double pmf_by_inversion(const CountVector& k, double t, const PgfHandle& pgf,
                               std::size_t M = 128, double doubling_tol = 1e-12) {
    return pmf_by_inversion_diagnostic(k, t, pgf, M, doubling_tol).value;
}

namespace detail {

// In-place forward DFT (kernel exp(-2 pi i jk/n)), n a power of two.
inline void fft_forward(std::complex<double>* a, std::size_t n,
                        const std::vector<std::complex<double>>& twiddle) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> v = a[i + j + len / 2] * twiddle[j * stride];
                const std::complex<double> u = a[i + j];
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

}  // namespace detail

// Full pmf table on {0..M-1}^m by evaluating the pgf on the torus grid and
// applying a radix-2 FFT along each axis. Assumes the pgf has real
// coefficients (Hermitian grid), which halves the evaluations.
class InversionTable {
public:
    InversionTable(const PgfHandle& pgf, double t, std::size_t dimension, std::size_t M)
        : m_(dimension), M_(M) {
        if (M < 2 || (M & (M - 1)) != 0)
            throw domain_error("InversionTable: grid size must be a power of two >= 2");
        const std::size_t cells = detail::checked_grid_cells(M, dimension);
        const auto roots = detail::unit_roots(M);

        std::vector<std::complex<double>> data(cells);
        std::vector<std::size_t> idx(m_, 0);
        std::vector<std::size_t> stride(m_, 1);
        for (std::size_t i = m_; i-- > 1;) stride[i - 1] = stride[i] * M;
        std::vector<std::complex<double>> u(m_, roots[0]);
        for (std::size_t flat = 0; flat < cells; ++flat) {
            std::size_t mirror = 0;
            for (std::size_t i = 0; i < m_; ++i) mirror += ((M - idx[i]) % M) * stride[i];
            if (mirror < flat) {
                data[flat] = std::conj(data[mirror]);
            } else {
                data[flat] = pgf(u, t);
            }
            for (std::size_t i = m_; i-- > 0;) {
                if (++idx[i] < M) {
                    u[i] = roots[idx[i]];
                    break;
                }
                idx[i] = 0;
                u[i] = roots[0];
            }
        }

        // Twiddle table for length M, reused by every axis pass.
        std::vector<std::complex<double>> twiddle(M / 2);
        const double step = -2.0 * std::numbers::pi_v<double> / static_cast<double>(M);
        for (std::size_t l = 0; l < M / 2; ++l)
            twiddle[l] = {std::cos(step * static_cast<double>(l)),
                          std::sin(step * static_cast<double>(l))};

        std::vector<std::complex<double>> line(M);
        for (std::size_t axis = 0; axis < m_; ++axis) {
            const std::size_t s = stride[axis];
            for (std::size_t flat = 0; flat < cells; ++flat) {
                if ((flat / s) % M != 0) continue;
                for (std::size_t l = 0; l < M; ++l) line[l] = data[flat + l * s];
                detail::fft_forward(line.data(), M, twiddle);
                for (std::size_t l = 0; l < M; ++l) data[flat + l * s] = line[l];
            }
        }

        const double norm = static_cast<double>(cells);
        table_.resize(cells);
        imag_residue_ = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            table_[i] = data[i].real() / norm;
            imag_residue_ = std::max(imag_residue_, std::abs(data[i].imag()) / norm);
        }
    }

    std::size_t dimension() const { return m_; }
    std::size_t grid_size() const { return M_; }
    double imag_residue() const { return imag_residue_; }
    const std::vector<double>& values() const { return table_; }

    double at(const CountVector& k) const {
        if (k.size() != m_) throw domain_error("InversionTable: wrong count dimension");
        std::size_t flat = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (k[i] >= M_) throw domain_error("InversionTable: count outside grid");
            flat = flat * M_ + static_cast<std::size_t>(k[i]);
        }
        return table_[flat];
    }

    double total() const {
        CompensatedSum s;
        for (double v : table_) s.add(v);
        return s.value();
    }

private:
    std::size_t m_, M_;
    std::vector<double> table_;
    double imag_residue_ = 0.0;
};

// ---------------------------------------------------------------------------
// Gauss-Laguerre mixture quadrature for the gamma layer
// ---------------------------------------------------------------------------

namespace detail {

struct QuadratureRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Nodes and weights for weight x^a e^{-x} on (0, inf), by Newton iteration
// on the generalized Laguerre polynomial (Press et al. style updates).
inline QuadratureRule gauss_laguerre(std::size_t n, double a) {
    if (n < 1) throw domain_error("gauss_laguerre: need at least one node");
    if (!(a > -1.0)) throw domain_error("gauss_laguerre: exponent must exceed -1");
    QuadratureRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const double dn = static_cast<double>(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            z = (1.0 + a) * (3.0 + 0.92 * a) / (1.0 + 2.4 * dn + 1.8 * a);
        } else if (i == 1) {
            z += (15.0 + 6.25 * a) / (1.0 + 0.9 * a + 2.5 * dn);
        } else {
            const double ai = static_cast<double>(i - 1);
            z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * a / (1.0 + 3.5 * ai)) *
                 (z - rule.x[i - 2]) / (1.0 + 0.3 * a);
        }
        double p1 = 1.0, p2 = 0.0, pp = 0.0;
        bool settled = false;
        for (int iter = 0; iter < 200 && !settled; ++iter) {
            p1 = 1.0;
            p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double dj = static_cast<double>(j);
                p1 = ((2.0 * dj + 1.0 + a - z) * p2 - (dj + a) * p3) / (dj + 1.0);
            }
            pp = (dn * p1 - (dn + a) * p2) / z;
            const double z1 = z;
            z = z1 - p1 / pp;
            settled = std::abs(z - z1) <= 1e-14 * std::max(1.0, std::abs(z));
        }
        if (!settled)
            throw convergence_error("gauss_laguerre: Newton iteration stalled", i, z);
        rule.x[i] = z;
        rule.w[i] = -std::exp(std::lgamma(a + dn) - std::lgamma(dn)) / (pp * dn * p2);
    }
    CompensatedSum ws;
    for (double w : rule.w) ws.add(w);
    const double target = std::exp(std::lgamma(1.0 + a));
    if (std::abs(ws.value() - target) > 1e-8 * target)
        throw consistency_error("gauss_laguerre: weights sum to " + std::to_string(ws.value()) +
                                ", expected Gamma(1+a) = " + std::to_string(target));
    return rule;
}

}  // namespace detail

// NB-type pmf as a gamma mixture of conditional pmf tables:
// P(k, t) = Gamma(rho t)^-1 int_0^inf s^{rho t - 1} e^{-s} q(k, s/mu) ds
// with q the MTSFPP pmf sharing lambdas and the tempered stable clock.
// Each Gauss-Laguerre node contributes one inversion table; the weighted
// accumulation keeps memory at one grid regardless of the node count.
class GammaMixtureQuadrature {
public:
    GammaMixtureQuadrature(const ProcessParams& p, double t, std::size_t nodes,
                           std::size_t M = 128)
        : m_(p.dimension()), M_(M) {
        p.validate();
        if (!p.gamma) throw domain_error("GammaMixtureQuadrature: process has no gamma layer");
        if (!(t > 0.0)) throw domain_error("GammaMixtureQuadrature: time must be positive");
        if (nodes < 2) throw domain_error("GammaMixtureQuadrature: need at least two nodes");
        const double a = p.gamma->rho * t - 1.0;
        const auto rule = detail::gauss_laguerre(nodes, a);
        const double total_weight = std::exp(std::lgamma(1.0 + a));

        ProcessParams conditional{p.lambdas, p.tss, std::nullopt};
        const PgfHandle pgf = make_pgf_mtsfpp(conditional);
        const std::size_t cells = detail::checked_grid_cells(M, m_);
        table_.assign(cells, 0.0);
        nodes_used_ = 0;
        imag_residue_ = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double wn = rule.w[i] / total_weight;
            if (!(wn > 1e-15)) continue;  // tail nodes below weight cutoff
            const InversionTable tab(pgf, rule.x[i] / p.gamma->mu, m_, M);
            const auto& v = tab.values();
            for (std::size_t c = 0; c < cells; ++c) table_[c] += wn * v[c];
            imag_residue_ = std::max(imag_residue_, tab.imag_residue());
            ++nodes_used_;
        }
    }

    std::size_t dimension() const { return m_; }
    std::size_t grid_size() const { return M_; }
    std::size_t nodes_used() const { return nodes_used_; }
    double imag_residue() const { return imag_residue_; }

    double pmf(const CountVector& k) const {
        if (k.size() != m_) throw domain_error("GammaMixtureQuadrature: wrong count dimension");
        std::size_t flat = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (k[i] >= M_) throw domain_error("GammaMixtureQuadrature: count outside grid");
            flat = flat * M_ + static_cast<std::size_t>(k[i]);
        }
        return table_[flat];
    }

    double total() const {
        CompensatedSum s;
        for (double v : table_) s.add(v);
        return s.value();
    }

private:
    std::size_t m_, M_;
    std::size_t nodes_used_ = 0;
    std::vector<double> table_;
    double imag_residue_ = 0.0;
};

inline double pmf_by_quadrature(const CountVector& k, double t, const ProcessParams& p,
                                std::size_t nodes = 32, std::size_t M = 128) {
    return GammaMixtureQuadrature(p, t, nodes, M).pmf(k);
}

// ---------------------------------------------------------------------------
// pmf by double series (Wright function core) with inversion fallback
// ---------------------------------------------------------------------------

namespace detail {

inline EvalResult clamp_probability(EvalResult r, const char* what, double upper = 1.0) {
    if (!std::isfinite(r.value))
        throw consistency_error(std::string(what) + ": non-finite value");
    if (r.value < 0.0) {
        if (r.value + r.abs_error_bound + 1e-12 < 0.0)
            throw consistency_error(std::string(what) + ": value " + std::to_string(r.value) +
                                    " negative beyond its error bound");
        r.value = 0.0;
    } else if (upper > 0.0 && r.value > upper) {
        if (r.value - r.abs_error_bound - 1e-12 > upper)
            throw consistency_error(std::string(what) + ": value " + std::to_string(r.value) +
                                    " exceeds " + std::to_string(upper) +
                                    " beyond its error bound");
        r.value = upper;
    }
    return r;
}

// Shared engine for the pmf and Levy-mass series. All three have the shape
//   prefactor * sum_{i>=0} theta^i / (i! S^i) * W_i
// where W_i is a Wright series in z with lower parameter 1 - |k| - i. The
// i-sum converges only for theta < S: each W_i grows like (|k|+i)-factorial
// ratios that the 1/(i! S^i) weight beats exactly when theta < S.
struct SeriesShape {
    std::vector<std::pair<double, double>> upper;  // Wright upper parameters
    double z = 0.0;                                // Wright argument
    double log_prefactor = 0.0;                    // log |prefactor|
    int sign = 1;                                  // sign of prefactor
    std::size_t first_wright_term = 0;             // skip leading pole terms
};

inline EvalResult tempered_series(const CountVector& k, const ProcessParams& p,
                                  const SeriesShape& shape, const SeriesControl& ctrl,
                                  const char* what) {
    const double S = p.total_rate();
    const double alpha = p.tss.alpha;
    const double theta = p.tss.theta;
    const std::uint64_t sk = total_count(k);
    if (theta >= S)
        throw convergence_error(std::string(what) + ": i-sum needs theta < total rate", 0,
                                theta / S);

    CompensatedSum isum;
    double bound = 0.0;
    std::size_t terms = 0;
    double cancellation = 1.0;
    double weight = 1.0;  // theta^i / (i! S^i)
    std::size_t small_streak = 0;
    bool converged = false;
    double last = 0.0;
    for (std::size_t i = 0; i < ctrl.max_terms; ++i) {
        if (i > 0) {
            if (theta == 0.0) {
                converged = true;
                break;
            }
            weight *= theta / (static_cast<double>(i) * S);
        }
        WrightSpec ws;
        ws.upper = shape.upper;
        ws.lower = {{1.0 - static_cast<double>(sk) - static_cast<double>(i), alpha}};
        const EvalResult wr =
            wright_pq(ws, shape.z, ctrl, shape.first_wright_term);
        const double term = weight * wr.value;
        isum.add(term);
        bound += weight * wr.abs_error_bound;
        terms += wr.terms_used;
        cancellation = std::max(cancellation, wr.cancellation);
        last = term;
        const double tol = std::max(ctrl.abs_tol, ctrl.rel_tol * std::abs(isum.value()));
        if (std::abs(term) <= tol) {
            if (++small_streak >= 3) {
                converged = true;
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    if (!converged)
        throw convergence_error(std::string(what) + ": i-sum did not converge", terms, last);
    bound += std::abs(last);
    cancellation = std::max(cancellation, isum.cancellation());
    if (cancellation > kCancellationFailover)
        throw convergence_error(std::string(what) + ": excessive cancellation", terms,
                                cancellation);

    const double scale = std::exp(shape.log_prefactor);
    EvalResult r;
    r.value = shape.sign * scale * isum.value();
    r.abs_error_bound = scale * bound;
    r.terms_used = terms;
    r.method = "series";
    r.converged = true;
    r.cancellation = cancellation;
    return r;
}

inline double log_count_prefactor(const CountVector& k, const ProcessParams& p) {
    // log of prod lambda_i^{k_i} / k_i!  minus |k| log S  (the (1/S)^{|k|} factor)
    double lm = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        lm += static_cast<double>(k[i]) * std::log(p.lambdas[i]) -
              std::lgamma(static_cast<double>(k[i]) + 1.0);
    }
    lm -= static_cast<double>(total_count(k)) * std::log(p.total_rate());
    return lm;
}

inline void check_counts(const CountVector& k, const ProcessParams& p) {
    if (k.size() != p.dimension())
        throw domain_error("pmf: count dimension does not match process dimension");
}

inline EvalResult delta_at_origin(const CountVector& k) {
    EvalResult r;
    r.value = (total_count(k) == 0) ? 1.0 : 0.0;
    r.abs_error_bound = 0.0;
    r.terms_used = 0;
    r.method = "exact";
    r.converged = true;
    r.cancellation = 1.0;
    return r;
}

inline EvalResult inversion_fallback(const CountVector& k, double t, const PgfHandle& pgf,
                                     const char* what) {
    std::size_t M = 128;
    for (std::uint64_t ki : k) {
        while (M <= ki) M *= 2;
    }
    const InversionDiagnostics d = pmf_by_inversion_diagnostic(k, t, pgf, M);
    EvalResult r;
    r.value = d.value;
    r.abs_error_bound = d.imag_residue + d.doubling_diff + 1e-13;
    r.terms_used = d.evaluations;
    r.method = "inversion_fallback";
    r.converged = true;
    r.cancellation = 1.0;
    return clamp_probability(std::move(r), what);
}

}  // namespace detail

// pmf of the tempered space-fractional multivariate process:
//   q(k, t) = e^{t theta^alpha} (-1/S)^{|k|} prod lambda^k/k!
//             * sum_i theta^i/(i! S^i) 1Psi1[(1,a); (1-|k|-i,a); -S^a t].
// Falls back to torus inversion of the pgf whenever the series is outside
// its convergence domain or too cancellation-heavy.
inline EvalResult pmf_mtsfpp(const CountVector& k, double t, const ProcessParams& p,
                             const SeriesControl& ctrl = {}) {
    p.validate();
    ctrl.validate();
    detail::check_counts(k, p);
    if (!(t >= 0.0) || !std::isfinite(t)) throw domain_error("pmf_mtsfpp: time must be >= 0");
    if (t == 0.0) return detail::delta_at_origin(k);
    const double S = p.total_rate();
    try {
        detail::SeriesShape shape;
        shape.upper = {{1.0, p.tss.alpha}};
        shape.z = -std::pow(S, p.tss.alpha) * t;
        shape.log_prefactor =
            detail::log_count_prefactor(k, p) + t * std::pow(p.tss.theta, p.tss.alpha);
        shape.sign = (total_count(k) % 2 == 0) ? 1 : -1;
        return detail::clamp_probability(detail::tempered_series(k, p, shape, ctrl, "pmf_mtsfpp"),
                                         "pmf_mtsfpp");
    } catch (const convergence_error&) {
        return detail::inversion_fallback(k, t, make_pgf_mtsfpp(p), "pmf_mtsfpp");
    }
}

// pmf of the gamma-mixed (negative binomial type) process:
//   P(k, t) = Gamma(rho t)^-1 (mu/(mu-theta^a))^{rho t} (-1/S)^{|k|}
//             prod lambda^k/k! * sum_i theta^i/(i! S^i)
//             2Psi1[(1,a),(rho t,1); (1-|k|-i,a); -S^a/(mu-theta^a)].
// Requires mu > theta^alpha; the Wright series additionally needs
// mu - theta^alpha > S^alpha (boundary-radius rule) and the i-sum needs
// theta < S, otherwise the inversion fallback takes over.
inline EvalResult pmf_mtsfnbp(const CountVector& k, double t, const ProcessParams& p,
                              const SeriesControl& ctrl = {}) {
    p.validate();
    ctrl.validate();
    detail::check_counts(k, p);
    if (!p.gamma) throw domain_error("pmf_mtsfnbp: process has no gamma layer");
    if (!(t >= 0.0) || !std::isfinite(t)) throw domain_error("pmf_mtsfnbp: time must be >= 0");
    const double gap = p.gamma->mu - std::pow(p.tss.theta, p.tss.alpha);
    if (!(gap > 0.0))
        throw domain_error("pmf_mtsfnbp: needs mu > theta^alpha");
    if (t == 0.0) return detail::delta_at_origin(k);
    const double S = p.total_rate();
    const double rt = p.gamma->rho * t;
    try {
        detail::SeriesShape shape;
        shape.upper = {{1.0, p.tss.alpha}, {rt, 1.0}};
        shape.z = -std::pow(S, p.tss.alpha) / gap;
        shape.log_prefactor = detail::log_count_prefactor(k, p) +
                              rt * std::log(p.gamma->mu / gap) - std::lgamma(rt);
        shape.sign = (total_count(k) % 2 == 0) ? 1 : -1;
        return detail::clamp_probability(detail::tempered_series(k, p, shape, ctrl, "pmf_mtsfnbp"),
                                         "pmf_mtsfnbp");
    } catch (const convergence_error&) {
        return detail::inversion_fallback(k, t, make_pgf_mtsfnbp(p), "pmf_mtsfnbp");
    }
}

// Levy measure mass at jump vector k (|k| >= 1) of the gamma-mixed process:
//   Pi(k) = rho (-1/S)^{|k|} prod lambda^k/k! * sum_i theta^i/(i! S^i)
//           2Psi1[(1,a),(0,1); (1-|k|-i,a); -S^a/(mu-theta^a)]
// with the r = 0 term excluded (the (0,1) upper parameter hits a gamma pole
// there, and the compound representation starts at r = 1). Series-only:
// requires mu - theta^alpha > S^alpha and theta < S.
inline EvalResult levy_mass(const CountVector& k, const ProcessParams& p,
                            const SeriesControl& ctrl = {}) {
    p.validate();
    ctrl.validate();
    detail::check_counts(k, p);
    if (!p.gamma) throw domain_error("levy_mass: process has no gamma layer");
    if (total_count(k) == 0) throw domain_error("levy_mass: jump vector must be nonzero");
    const double S = p.total_rate();
    const double gap = p.gamma->mu - std::pow(p.tss.theta, p.tss.alpha);
    if (!(gap > std::pow(S, p.tss.alpha)))
        throw convergence_error("levy_mass: series needs mu - theta^alpha > S^alpha", 0, gap);
    detail::SeriesShape shape;
    shape.upper = {{1.0, p.tss.alpha}, {0.0, 1.0}};
    shape.z = -std::pow(S, p.tss.alpha) / gap;
    shape.log_prefactor = detail::log_count_prefactor(k, p) + std::log(p.gamma->rho);
    shape.sign = (total_count(k) % 2 == 0) ? 1 : -1;
    shape.first_wright_term = 1;
    EvalResult r = detail::tempered_series(k, p, shape, ctrl, "levy_mass");
    return detail::clamp_probability(std::move(r), "levy_mass", 0.0);
}

// ---------------------------------------------------------------------------
// Semigroup transition weights over one step of length h
// ---------------------------------------------------------------------------

// One-step weights of the Markov total-count skeleton: with psi the composed
// exponent and lambda the total rate,
//   p_0 = 1 - h psi(lambda),   p_j = -h (-lambda)^j psi^(j)(lambda) / j!.
// All p_j with j >= 1 are positive by complete monotonicity and sum to
// h psi(lambda) in the limit; total_rate_order bounds the derivative table.
inline double transition_probability(std::uint64_t j, double h, const ProcessParams& p,
                                     std::size_t total_rate_order = kMaxPsiOrder) {
    p.validate();
    if (!p.gamma) throw domain_error("transition_probability: process has no gamma layer");
    if (!(h > 0.0)) throw domain_error("transition_probability: step must be positive");
    if (total_rate_order < 1 || total_rate_order > kMaxPsiOrder)
        throw domain_error("transition_probability: derivative order out of range");
    const double lambda = p.total_rate();
    const double psi = laplace_exponent_composed(lambda, p.tss, *p.gamma);
    if (j == 0) {
        const double p0 = 1.0 - h * psi;
        if (p0 < 0.0)
            throw domain_error("transition_probability: step too large, 1 - h psi < 0");
        return p0;
    }
    if (j > total_rate_order)
        throw domain_error("transition_probability: jump size exceeds derivative order");
    const auto ders = psi_derivatives(lambda, total_rate_order, p.tss, *p.gamma);
    // -(-lambda)^j psi^(j) / j! = (-1)^{j+1} lambda^j psi^(j) / j!
    const double weight = h * std::exp(static_cast<double>(j) * std::log(lambda) -
                                       std::lgamma(static_cast<double>(j) + 1.0));
    const double der = ders[j - 1];
    const double signed_term = ((j % 2 == 0) ? -1.0 : 1.0) * weight * der;
    return signed_term;
}

// ---------------------------------------------------------------------------
// Generator residual diagnostics
// ---------------------------------------------------------------------------

// |d/dt G + psi_tss(sum lambda (1-u)) G| with the derivative by central
// difference; a direct check that the pgf solves its evolution equation.
inline double operator_residual_pgf(const std::vector<double>& u, double t,
                                    const ProcessParams& p) {
    p.validate();
    if (u.size() != p.dimension())
        throw domain_error("operator_residual_pgf: argument dimension mismatch");
    for (double ui : u) {
        if (!(ui >= -1.0 && ui <= 1.0))
            throw domain_error("operator_residual_pgf: arguments must lie in [-1, 1]");
    }
    const double h = 1e-5;
    if (!(t > h)) throw domain_error("operator_residual_pgf: time must exceed the step 1e-5");
    double z = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) z += p.lambdas[i] * (1.0 - u[i]);
    const double psi = laplace_exponent_tss(z, p.tss);
    const double g = std::exp(-t * psi);
    const double dg = (std::exp(-(t + h) * psi) - std::exp(-(t - h) * psi)) / (2.0 * h);
    return std::abs(dg + psi * g);
}

struct OperatorResidual {
    double residual = 0.0;
    double truncation_budget = 0.0;
};

namespace detail {

// T_s = sum over l <= k, |l| = s of (s; l) prod lambda^l pmf(k - l): the
// action of the s-fold shift part of the fractional difference operator.
inline std::vector<double> shift_moments(
    const CountVector& k, const ProcessParams& p,
    const std::function<double(const CountVector&)>& pmf) {
    const std::size_t m = k.size();
    const std::uint64_t sk = total_count(k);
    std::vector<double> ts(static_cast<std::size_t>(sk) + 1, 0.0);
    CountVector l(m, 0), rem(k);
    for (;;) {
        const std::uint64_t sl = total_count(l);
        double coeff = std::lgamma(static_cast<double>(sl) + 1.0);
        for (std::size_t i = 0; i < m; ++i) {
            coeff -= std::lgamma(static_cast<double>(l[i]) + 1.0);
            coeff += static_cast<double>(l[i]) * std::log(p.lambdas[i]);
        }
        for (std::size_t i = 0; i < m; ++i) rem[i] = k[i] - l[i];
        ts[static_cast<std::size_t>(sl)] += std::exp(coeff) * pmf(rem);
        std::size_t axis = m;
        while (axis-- > 0) {
            if (++l[axis] <= k[axis]) break;
            l[axis] = 0;
            if (axis == 0) return ts;
        }
    }
}

}  // namespace detail

// Residual of the governing difference-differential equation at (k, t),
// truncating the fractional-difference expansion after R binomial terms.
// Without a gamma layer the time side is d/dt by central difference; with
// one it is the exact difference mu (P(t) - P(t - 1/rho)), valid for
// t > 1/rho. truncation_budget is the magnitude of the last retained term.
inline OperatorResidual operator_residual_pmf(const CountVector& k, double t,
                                              const ProcessParams& p, std::size_t R,
                                              const SeriesControl& ctrl = {}) {
    p.validate();
    ctrl.validate();
    detail::check_counts(k, p);
    if (R < 1) throw domain_error("operator_residual_pmf: need at least one expansion term");
    const bool nb = p.gamma.has_value();
    const double S = p.total_rate();
    const double alpha = p.tss.alpha;
    const double theta = p.tss.theta;
    const std::uint64_t sk = total_count(k);

    const auto pmf_at = [&](const CountVector& kk, double tt) {
        return nb ? pmf_mtsfnbp(kk, tt, p, ctrl).value : pmf_mtsfpp(kk, tt, p, ctrl).value;
    };
    const auto ts = detail::shift_moments(
        k, p, [&](const CountVector& kk) { return pmf_at(kk, t); });

    // Binomial expansion of S^a (I - V)^a where V = (theta I + shifts)/S:
    // sum_r C(a, r) (-1/S)^r sum_{s<=min(r,|k|)} C(r, s) (-theta)^{r-s} T_s.
    CompensatedSum expansion;
    double budget = 0.0;
    for (std::size_t r = 0; r <= R; ++r) {
        double row = 1.0;  // C(r, s) built multiplicatively, exact for r <= ~50
        double inner = 0.0, inner_abs = 0.0;
        for (std::size_t s = 0; s <= std::min<std::size_t>(r, sk); ++s) {
            if (s > 0) row *= static_cast<double>(r - s + 1) / static_cast<double>(s);
            const double tp = std::pow(-theta, static_cast<double>(r - s));
            inner += row * tp * ts[s];
            inner_abs += row * std::abs(tp) * std::abs(ts[s]);
        }
        const double outer =
            gen_binomial(alpha, static_cast<std::uint32_t>(r)) *
            std::pow(-1.0 / S, static_cast<double>(r));
        expansion.add(outer * inner);
        if (r == R) budget = std::abs(outer) * inner_abs;
    }
    const double sa = std::pow(S, alpha);
    const double spatial = sa * expansion.value() - std::pow(theta, alpha) * ts[0];

    double lhs;
    if (!nb) {
        const double h = 1e-5;
        if (!(t > h))
            throw domain_error("operator_residual_pmf: time must exceed the step 1e-5");
        lhs = (pmf_at(k, t + h) - pmf_at(k, t - h)) / (2.0 * h);
    } else {
        const double step = 1.0 / p.gamma->rho;
        if (!(t > step))
            throw domain_error("operator_residual_pmf: need t > 1/rho for the difference form");
        lhs = p.gamma->mu * (pmf_at(k, t) - pmf_at(k, t - step));
    }
    OperatorResidual out;
    out.residual = std::abs(lhs + spatial);
    out.truncation_budget = sa * budget;
    return out;
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

inline CountVector sample_mtsfpp_terminal(double t, const ProcessParams& p, Rng& rng) {
    p.validate();
    if (!(t >= 0.0)) throw domain_error("sample_mtsfpp_terminal: time must be >= 0");
    const double clock = sample_tss_increment(p.tss, t, rng);
    CountVector k(p.dimension());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = rng.poisson(p.lambdas[i] * clock);
    return k;
}

inline CountVector sample_mtsfnbp_terminal(double t, const ProcessParams& p, Rng& rng) {
    p.validate();
    if (!p.gamma) throw domain_error("sample_mtsfnbp_terminal: process has no gamma layer");
    if (!(t >= 0.0)) throw domain_error("sample_mtsfnbp_terminal: time must be >= 0");
    const double operational = sample_gamma_increment(*p.gamma, t, rng);
    const double clock =
        (operational > 0.0) ? sample_tss_increment(p.tss, operational, rng) : 0.0;
    CountVector k(p.dimension());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = rng.poisson(p.lambdas[i] * clock);
    return k;
}

struct PathEvent {
    double time = 0.0;
    std::size_t component = 0;
    std::uint64_t size = 0;
};

struct PathSample {
    std::vector<PathEvent> events;
    CountVector terminal;
    double horizon = 0.0;
    double time_resolution = 0.0;
};

namespace detail {

struct PathRefiner {
    const ProcessParams& p;
    double resolution;
    Rng& rng;
    PathSample& out;
    std::vector<double> probs;

    void emit(double when, std::uint64_t batch) {
        const auto counts = rng.multinomial(batch, probs);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] == 0) continue;
            out.events.push_back({when, i, counts[i]});
            out.terminal[i] += counts[i];
        }
    }

    // Splits a cell's batch of `batch` arrivals across binary halves. The
    // gamma layer splits exactly (Beta bridge); the tempered stable layer
    // redraws fresh half-increments and rescales them to the known total,
    // which biases within-cell placement by O(cell width) only.
    void refine(double t0, double width, double operational, double clock, std::uint64_t batch) {
        if (batch == 0) return;
        if (width <= resolution || !(clock > 0.0)) {
            emit(t0 + 0.5 * width, batch);
            return;
        }
        const double half = 0.5 * width;
        double op1, op2;
        if (p.gamma) {
            const double x = rng.gamma(p.gamma->rho * half);
            const double y = rng.gamma(p.gamma->rho * half);
            const double frac = (x + y > 0.0) ? x / (x + y) : 0.5;
            op1 = operational * frac;
            op2 = operational - op1;
        } else {
            op1 = op2 = half;
        }
        const double a = (op1 > 0.0) ? sample_tss_increment(p.tss, op1, rng) : 0.0;
        const double b = (op2 > 0.0) ? sample_tss_increment(p.tss, op2, rng) : 0.0;
        const double share = (a + b > 0.0) ? a / (a + b) : 0.5;
        const double clock1 = clock * share;
        const double clock2 = clock - clock1;
        const std::uint64_t b1 = rng.binomial(batch, std::clamp(share, 0.0, 1.0));
        const std::uint64_t b2 = batch - b1;
        refine(t0, half, op1, clock1, b1);
        refine(t0 + half, half, op2, clock2, b2);
    }
};

}  // namespace detail

// Event path on [0, t]: per grid cell the subordinator increment fixes a
// conditionally Poisson batch, which binary refinement localizes down to
// grid_dt/1024. Event times within a leaf are midpoints, so simultaneous
// arrivals in different components carry the same timestamp. The terminal
// vector is exact in law; interior timing is approximate at the stated
// resolution.
inline PathSample sample_path(double t, const ProcessParams& p, double grid_dt, Rng& rng) {
    p.validate();
    if (!(t > 0.0)) throw domain_error("sample_path: horizon must be positive");
    if (!(grid_dt > 0.0)) throw domain_error("sample_path: grid_dt must be positive");
    PathSample out;
    out.horizon = t;
    out.terminal.assign(p.dimension(), 0);
    out.time_resolution = grid_dt / 1024.0;
    const double S = p.total_rate();
    const std::size_t cells = static_cast<std::size_t>(std::ceil(t / grid_dt));
    const double width = t / static_cast<double>(cells);

    detail::PathRefiner refiner{p, out.time_resolution, rng, out, {}};
    refiner.probs.resize(p.dimension());
    for (std::size_t i = 0; i < p.dimension(); ++i) refiner.probs[i] = p.lambdas[i] / S;

    for (std::size_t c = 0; c < cells; ++c) {
        const double t0 = static_cast<double>(c) * width;
        const double operational =
            p.gamma ? sample_gamma_increment(*p.gamma, width, rng) : width;
        const double clock =
            (operational > 0.0) ? sample_tss_increment(p.tss, operational, rng) : 0.0;
        const std::uint64_t batch = rng.poisson(S * clock);
        refiner.refine(t0, width, operational, clock, batch);
    }
    return out;
}

// Terminal counts of the mixture-subordinated multivariate Poisson process:
// components share one mixture-of-tempered-stable clock value at time t.
inline CountVector mmtsfpp_terminal(double t, const std::vector<double>& lambdas,
                                    const MixtureParams& mix, Rng& rng) {
    mix.validate();
    if (lambdas.empty()) throw domain_error("mmtsfpp_terminal: need at least one rate");
    for (double l : lambdas) {
        if (!(l > 0.0)) throw domain_error("mmtsfpp_terminal: rates must be positive");
    }
    if (!(t >= 0.0)) throw domain_error("mmtsfpp_terminal: time must be >= 0");
    const double clock = sample_mixture_tss_increment(mix, t, rng);
    CountVector k(lambdas.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = rng.poisson(lambdas[i] * clock);
    return k;
}

// Time-fractional variant: the clock is the inverse (first-passage) process
// of the mixture subordinator, simulated on a grid of step grid_dt.
inline CountVector mmttfpp_terminal(double t, const std::vector<double>& lambdas,
                                    const MixtureParams& mix, double grid_dt, Rng& rng) {
    mix.validate();
    if (lambdas.empty()) throw domain_error("mmttfpp_terminal: need at least one rate");
    for (double l : lambdas) {
        if (!(l > 0.0)) throw domain_error("mmttfpp_terminal: rates must be positive");
    }
    if (!(t >= 0.0)) throw domain_error("mmttfpp_terminal: time must be >= 0");
    const double clock = sample_inverse_mixture_tss(mix, t, grid_dt, rng);
    CountVector k(lambdas.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = rng.poisson(lambdas[i] * clock);
    return k;
}

}  // namespace fraccount
