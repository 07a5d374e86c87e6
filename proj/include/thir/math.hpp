#ifndef THIR_MATH_HPP
#define THIR_MATH_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace thir {

// Streaming log-sum-exp accumulator. Terms may be -inf (they contribute
// nothing); the running maximum keeps the exponentials in range.
class LogSumExp {
public:
    void add(double term) {
        if (term == -std::numeric_limits<double>::infinity()) return;
        if (term <= max_) {
            sum_ += std::exp(term - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - term) + 1.0;
            max_ = term;
        }
    }

    // log(sum of exp(terms)); -inf when nothing was added.
    double value() const {
        if (sum_ <= 0.0) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

inline double log_sum_exp(const std::vector<double>& terms) {
    LogSumExp acc;
    for (double t : terms) acc.add(t);
    return acc.value();
}

// Gaussian tail probability Q(x) = P(N(0,1) > x).
inline double q_function(double x) {
    return 0.5 * std::erfc(x / 1.4142135623730951);
}

inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

// Standard error of a binomial proportion estimate.
inline double binomial_stderr(double p, double n) {
    if (n <= 0.0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

inline double clamp_llr(double v, double clamp) {
    return std::clamp(v, -clamp, clamp);
}

// Empirical CDF evaluated at x: fraction of samples <= x.
inline double empirical_cdf(const std::vector<double>& sorted_samples, double x) {
    auto it = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), x);
    if (sorted_samples.empty()) return 0.0;
    return static_cast<double>(it - sorted_samples.begin()) /
           static_cast<double>(sorted_samples.size());
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Log-domain linear interpolation of the SNR (dB) at which a BER curve
// crosses the given level. Curve points must be sorted by SNR ascending.
// Returns NaN when the curve never crosses the level.
inline double snr_at_ber(const std::vector<double>& snr_db,
                         const std::vector<double>& ber, double level) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < snr_db.size(); ++i) {
        const double b0 = ber[i];
        const double b1 = ber[i + 1];
        if (b0 >= level && b1 <= level) {
            if (b0 == b1) return snr_db[i];
            if (b1 <= 0.0) {
                // Crossed into exact zero; fall back to linear in BER.
                const double f = (b0 - level) / (b0 - b1);
                return snr_db[i] + f * (snr_db[i + 1] - snr_db[i]);
            }
            const double l0 = std::log(b0);
            const double l1 = std::log(b1);
            const double f = (l0 - std::log(level)) / (l0 - l1);
            return snr_db[i] + f * (snr_db[i + 1] - snr_db[i]);
        }
    }
    return nan;
}

// Log-domain interpolation of a BER curve at an SNR inside the grid.
inline double ber_at_snr(const std::vector<double>& snr_db,
                         const std::vector<double>& ber, double snr) {
    if (snr_db.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (snr <= snr_db.front()) return ber.front();
    if (snr >= snr_db.back()) return ber.back();
    for (std::size_t i = 0; i + 1 < snr_db.size(); ++i) {
        if (snr >= snr_db[i] && snr <= snr_db[i + 1]) {
            const double f = (snr - snr_db[i]) / (snr_db[i + 1] - snr_db[i]);
            const double b0 = ber[i];
            const double b1 = ber[i + 1];
            if (b0 <= 0.0 || b1 <= 0.0) return b0 + f * (b1 - b0);
            return std::exp(std::log(b0) + f * (std::log(b1) - std::log(b0)));
        }
    }
    return ber.back();
}

}  // namespace thir

#endif  // THIR_MATH_HPP
