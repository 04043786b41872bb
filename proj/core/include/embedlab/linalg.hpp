#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace embedlab {

// Dense row-major matrix of 64-bit reals. Embedding tables are stored with
// one row per token (V x H), so the Gram matrix of the hidden space is
// gram_small(E) = E^T E.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }

    std::size_t size() const { return data.size(); }
    bool all_finite() const;
    Matrix transposed() const;
};

namespace linalg {

// Spectral decomposition of a symmetric matrix. Eigenvalues are sorted in
// descending order; eigenvectors sit in the columns of `eigenvectors`, have
// unit 2-norm, and carry a deterministic sign (largest-magnitude component
// positive, first index wins ties).
struct EigenResult {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

// Result of a through-origin linear fit y ~ slope_A * x, with a mean-centered
// coefficient of determination and a binned mutual-information estimate.
struct FitResult {
    double slope_A = 0.0;
    double r_squared = 0.0;
    double mutual_information = 0.0;  // nats
};

inline constexpr std::size_t kMaxEigenDim = 4096;

// Cyclic Jacobi eigensolver with fixed sweep order; bit-reproducible for
// identical input. Rejects matrices that are not symmetric within a relative
// tolerance of 1e-12, naming the worst-offending entry pair.
EigenResult sym_eigen(const Matrix& a);

// Singular values of an arbitrary matrix, descending and clamped at zero.
// Computed as square roots of the eigenvalues of the smaller Gram matrix.
std::vector<double> singular_values(const Matrix& m);

// Sample Pearson correlation. Constant input yields 0; when the caller wants
// to know, `constant_input` is set accordingly.
double pearson(std::span<const double> x, std::span<const double> y,
               bool* constant_input = nullptr);

// Least-squares fit of y = A*x through the origin: A = sum(xy)/sum(x^2).
// r_squared = 1 - SS_res/SS_tot with SS_tot mean-centered, so it can go
// negative for fits worse than a constant. Rejects all-zero x.
FitResult fit_through_origin(std::span<const double> x, std::span<const double> y);

// Plug-in mutual information in nats from equal-frequency binning of both
// variables; bin count floor(sqrt(N/5)) clamped to [4, 64]. Invariant under
// strictly monotone transforms up to tie handling.
double mutual_information(std::span<const double> x, std::span<const double> y);

// E^T E (cols x cols) or E E^T (rows x rows), whichever is smaller.
Matrix gram_small(const Matrix& m);

}  // namespace linalg
}  // namespace embedlab
