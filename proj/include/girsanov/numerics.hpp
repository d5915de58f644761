#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace girsanov {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier-compensated accumulator. The ledger and compensator integrals sum
// thousands of small cells against 1e-12 tolerances, so plain += is not enough.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

// Row-major square matrix of runtime dimension d (d <= 16 by contract).
class Mat {
public:
    Mat() = default;
    explicit Mat(std::size_t d) : d_(d), a_(d * d, 0.0) {}

    std::size_t dim() const { return d_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * d_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }

    static Mat identity(std::size_t d) {
        Mat m(d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diag(const Vec& v) {
        Mat m(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) m(i, i) = v[i];
        return m;
    }

    void matvec(std::span<const double> x, Vec& out) const {
        out.assign(d_, 0.0);
        for (std::size_t i = 0; i < d_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d_; ++j) s += a_[i * d_ + j] * x[j];
            out[i] = s;
        }
    }

    // x . (M y)
    double quad(std::span<const double> x, std::span<const double> y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < d_; ++i) {
            double r = 0.0;
            for (std::size_t j = 0; j < d_; ++j) r += a_[i * d_ + j] * y[j];
            s += x[i] * r;
        }
        return s;
    }

    void add_outer(std::span<const double> x) {
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j) a_[i * d_ + j] += x[i] * x[j];
    }

    bool symmetric_psd(double tol = 1e-10) const {
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = i + 1; j < d_; ++j)
                if (std::abs(a_[i * d_ + j] - a_[j * d_ + i]) > tol) return false;
        // Cholesky with tolerance shift; enough for d <= 16.
        Mat c = *this;
        for (std::size_t k = 0; k < d_; ++k) {
            double piv = c(k, k);
            if (piv < -tol) return false;
            if (piv <= tol) {
                for (std::size_t i = k + 1; i < d_; ++i)
                    if (std::abs(c(i, k)) > std::sqrt(tol)) return false;
                continue;
            }
            double rk = std::sqrt(piv);
            for (std::size_t i = k; i < d_; ++i) c(i, k) /= rk;
            for (std::size_t j = k + 1; j < d_; ++j)
                for (std::size_t i = j; i < d_; ++i) c(i, j) -= c(i, k) * c(j, k);
        }
        return true;
    }

private:
    std::size_t d_ = 0;
    std::vector<double> a_;
};

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr r;
    r.n = xs.size();
    if (r.n == 0) return r;
    KahanSum s;
    for (double x : xs) s.add(x);
    r.mean = s.value() / static_cast<double>(r.n);
    if (r.n < 2) return r;
    KahanSum q;
    for (double x : xs) {
        double d = x - r.mean;
        q.add(d * d);
    }
    double var = q.value() / static_cast<double>(r.n - 1);
    r.stderr_ = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

}  // namespace girsanov
