#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fraccount {

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown when a series or iteration fails to meet its tolerance budget.
// Carries enough state to report what was achieved before giving up.
struct convergence_error : std::runtime_error {
    std::size_t terms_used;
    double last_term;
    convergence_error(const std::string& what, std::size_t terms, double last)
        : std::runtime_error(what + " (terms=" + std::to_string(terms) +
                             ", last term=" + std::to_string(last) + ")"),
          terms_used(terms), last_term(last) {}
};

// Thrown when two routes that must agree do not (e.g. a transform inversion
// whose imaginary residue or grid-doubling drift exceeds its budget), or when
// a value lands outside its feasible range by more than its error bound.
struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeriesControl {
    std::size_t max_terms = 2000;
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;

    void validate() const {
        if (max_terms < 1) throw domain_error("SeriesControl: max_terms must be >= 1");
        if (!(abs_tol > 0.0) && !(rel_tol > 0.0))
            throw domain_error("SeriesControl: at least one tolerance must be positive");
    }
};

// Neumaier-compensated accumulator. Also tracks the sum of magnitudes so the
// caller can estimate how much cancellation the final value absorbed.
class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        abs_sum_ += std::abs(x);
    }
    double value() const { return sum_ + comp_; }
    double magnitude_sum() const { return abs_sum_; }
    // Ratio of mass summed to mass surviving; large values mean the result
    // lives many orders of magnitude below the individual terms.
    double cancellation() const {
        double v = std::abs(value());
        if (abs_sum_ == 0.0) return 1.0;
        if (v == 0.0) return INFINITY;
        return abs_sum_ / v;
    }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
    double abs_sum_ = 0.0;
};

struct EvalResult {
    double value = 0.0;
    double abs_error_bound = 0.0;
    std::size_t terms_used = 0;
    std::string method;
    bool converged = false;
    double cancellation = 1.0;

    double value_or_throw() const {
        if (!converged)
            throw convergence_error("series did not converge: " + method,
                                    terms_used, abs_error_bound);
        return value;
    }
};

// Cancellation threshold above which an alternating-series result is treated
// as untrustworthy and the caller should switch to an integral-transform route.
inline constexpr double kCancellationFailover = 1e6;

// Generic term-by-term summation driver. `term(k)` returns the k-th term.
// Stops once several consecutive terms after the first nonzero one fall below
// the tolerance while decreasing; the reported bound is the last term seen
// plus a roundoff allowance proportional to the mass summed.
template <typename TermFn>
EvalResult sum_series(TermFn&& term, const SeriesControl& ctrl, const std::string& method,
                      std::size_t first_index = 0) {
    ctrl.validate();
    CompensatedSum acc;
    std::size_t small_run = 0;
    bool seen_nonzero = false;
    double prev_mag = INFINITY;
    double last_mag = 0.0;

    for (std::size_t k = first_index; k < first_index + ctrl.max_terms; ++k) {
        double t = term(k);
        if (!std::isfinite(t))
            throw convergence_error("non-finite term in " + method, k, t);
        acc.add(t);
        double mag = std::abs(t);
        last_mag = mag;
        if (mag > 0.0) seen_nonzero = true;
        double thr = std::max(ctrl.abs_tol, ctrl.rel_tol * std::abs(acc.value()));
        if (seen_nonzero && mag <= thr && mag <= prev_mag)
            ++small_run;
        else
            small_run = 0;
        prev_mag = mag;
        if (small_run >= 4) {
            EvalResult r;
            r.value = acc.value();
            r.terms_used = k - first_index + 1;
            r.abs_error_bound = mag + 1e-16 * acc.magnitude_sum();
            r.method = method;
            r.converged = true;
            r.cancellation = acc.cancellation();
            return r;
        }
    }
    EvalResult r;
    r.value = acc.value();
    r.terms_used = ctrl.max_terms;
    r.abs_error_bound = last_mag + 1e-16 * acc.magnitude_sum();
    r.method = method;
    r.converged = false;
    r.cancellation = acc.cancellation();
    return r;
}

}  // namespace fraccount
