#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace brm {

/// log(sum(exp(q))) with the max shifted out, so large action values never
/// overflow. Returns the max itself when all entries are -inf.
inline double logsumexp(const double* q, int n) {
    double m = q[0];
    for (int i = 1; i < n; ++i)
        if (q[i] > m) m = q[i];
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(q[i] - m);
    return m + std::log(s);
}

/// logsumexp and softmax from one shared max shift; out must hold n entries.
inline double logsumexp_softmax(const double* q, int n, double* out) {
    double m = q[0];
    for (int i = 1; i < n; ++i)
        if (q[i] > m) m = q[i];
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::exp(q[i] - m);
        s += out[i];
    }
    const double inv = 1.0 / s;
    for (int i = 0; i < n; ++i) out[i] *= inv;
    return m + std::log(s);
}

/// Kahan compensated accumulator; summation order is the insertion order,
/// which keeps batch reductions deterministic.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares line through (x_i, y_i).
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

} // namespace brm
