#include "embedlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace embedlab {

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix Matrix::transposed() const {
    Matrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
    return t;
}

namespace linalg {
namespace {

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::abs(v));
    return m;
}

void check_symmetric(const Matrix& a) {
    if (a.rows != a.cols)
        throw std::invalid_argument("sym_eigen: matrix is " + std::to_string(a.rows) +
                                    "x" + std::to_string(a.cols) + ", not square");
    if (a.rows > kMaxEigenDim)
        throw std::invalid_argument("sym_eigen: dimension " + std::to_string(a.rows) +
                                    " exceeds limit " + std::to_string(kMaxEigenDim));
    if (!a.all_finite()) throw std::invalid_argument("sym_eigen: non-finite entry");

    const double tol = 1e-12 * std::max(1.0, max_abs(a));
    double worst = 0.0;
    std::size_t wi = 0, wj = 0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = i + 1; j < a.cols; ++j) {
            const double d = std::abs(a.at(i, j) - a.at(j, i));
            if (d > worst) {
                worst = d;
                wi = i;
                wj = j;
            }
        }
    }
    if (worst > tol)
        throw std::invalid_argument(
            "sym_eigen: matrix not symmetric, entries (" + std::to_string(wi) + "," +
            std::to_string(wj) + ") and (" + std::to_string(wj) + "," +
            std::to_string(wi) + ") differ by " + std::to_string(worst));
}

double off_diag_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = i + 1; j < a.cols; ++j) s += a.at(i, j) * a.at(i, j);
    return std::sqrt(2.0 * s);
}

// One Jacobi rotation zeroing a(p,q), accumulated into v.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
    const double apq = a.at(p, q);
    if (apq == 0.0) return;
    const double theta = 0.5 * (a.at(q, q) - a.at(p, p)) / apq;
    double t;
    if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;  // avoid overflow in theta*theta
    } else {
        t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
    }
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;
    const double tau = s / (1.0 + c);
    const double h = t * apq;

    a.at(p, p) -= h;
    a.at(q, q) += h;
    a.at(p, q) = 0.0;
    a.at(q, p) = 0.0;
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == p || j == q) continue;
        const double ajp = a.at(j, p);
        const double ajq = a.at(j, q);
        a.at(j, p) = ajp - s * (ajq + ajp * tau);
        a.at(p, j) = a.at(j, p);
        a.at(j, q) = ajq + s * (ajp - ajq * tau);
        a.at(q, j) = a.at(j, q);
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double vjp = v.at(j, p);
        const double vjq = v.at(j, q);
        v.at(j, p) = vjp - s * (vjq + vjp * tau);
        v.at(j, q) = vjq + s * (vjp - vjq * tau);
    }
}

}  // namespace

EigenResult sym_eigen(const Matrix& input) {
    check_symmetric(input);
    const std::size_t n = input.rows;

    Matrix a = input;
    // symmetrize exactly so the sweep sees one consistent value per pair
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a.at(i, j) + a.at(j, i));
            a.at(i, j) = m;
            a.at(j, i) = m;
        }

    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    const double scale = std::max(1.0, max_abs(a));
    const double stop = 1e-15 * scale * static_cast<double>(n);
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_diag_norm(a) <= stop) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (a.at(p, q) != 0.0) rotate(a, v, p, q);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a.at(i, i) > a.at(j, j);
    });

    EigenResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        res.eigenvalues[k] = a.at(src, src);
        // sign convention: largest-magnitude component positive, first index wins
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::abs(v.at(i, src));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        const double sign = v.at(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) res.eigenvectors.at(i, k) = sign * v.at(i, src);
    }
    return res;
}

Matrix gram_small(const Matrix& m) {
    const bool rows_smaller = m.rows <= m.cols;
    const std::size_t n = rows_smaller ? m.rows : m.cols;
    Matrix g(n, n);
    if (rows_smaller) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < m.cols; ++k) s += m.at(i, k) * m.at(j, k);
                g.at(i, j) = s;
                g.at(j, i) = s;
            }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < m.rows; ++k) s += m.at(k, i) * m.at(k, j);
                g.at(i, j) = s;
                g.at(j, i) = s;
            }
    }
    return g;
}

std::vector<double> singular_values(const Matrix& m) {
    if (m.rows < 1 || m.cols < 1)
        throw std::invalid_argument("singular_values: empty matrix");
    if (!m.all_finite())
        throw std::invalid_argument("singular_values: non-finite entry");

    EigenResult eig = sym_eigen(gram_small(m));
    std::vector<double> sv(eig.eigenvalues.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
        sv[i] = std::sqrt(std::max(0.0, eig.eigenvalues[i]));
    return sv;  // eigenvalues already descending
}

double pearson(std::span<const double> x, std::span<const double> y,
               bool* constant_input) {
    if (x.size() != y.size())
        throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
    if (constant_input) *constant_input = false;

    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        if (constant_input) *constant_input = true;
        return 0.0;
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

namespace {

// Equal-frequency bin assignment: sort by (value, index) and cut the sorted
// order into `bins` contiguous groups of near-equal size.
std::vector<int> equal_frequency_bins(std::span<const double> x, int bins) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<int> bin(n);
    for (std::size_t pos = 0; pos < n; ++pos)
        bin[order[pos]] = static_cast<int>((pos * static_cast<std::size_t>(bins)) / n);
    return bin;
}

}  // namespace

double mutual_information(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("mutual_information: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("mutual_information: need at least 2 points");

    int bins = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n) / 5.0)));
    bins = std::clamp(bins, 4, 64);

    const std::vector<int> bx = equal_frequency_bins(x, bins);
    const std::vector<int> by = equal_frequency_bins(y, bins);

    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(bx[i]) * bins + by[i]] += w;
        px[bx[i]] += w;
        py[by[i]] += w;
    }
    double mi = 0.0;
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            const double p = joint[static_cast<std::size_t>(i) * bins + j];
            if (p > 0.0) mi += p * std::log(p / (px[i] * py[j]));
        }
    return std::max(0.0, mi);
}

FitResult fit_through_origin(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit_through_origin: length mismatch");
    if (x.size() < 2)
        throw std::invalid_argument("fit_through_origin: need at least 2 points");

    double sxx = 0.0, sxy = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]))
            throw std::invalid_argument("fit_through_origin: non-finite x");
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        my += y[i];
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_through_origin: all-zero x");
    my /= static_cast<double>(x.size());

    FitResult fit;
    fit.slope_A = sxy / sxx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.slope_A * x[i];
        const double d = y[i] - my;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) {
        fit.r_squared = ss_res == 0.0 ? 1.0 : 0.0;  // constant response
    } else {
        fit.r_squared = 1.0 - ss_res / ss_tot;
    }
    fit.mutual_information = mutual_information(x, y);
    return fit;
}

}  // namespace linalg
}  // namespace embedlab
