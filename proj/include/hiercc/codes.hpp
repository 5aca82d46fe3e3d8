#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hiercc/cuboid.hpp"
#include "hiercc/matrix.hpp"

namespace hiercc {

enum class CodeFamily { Polynomial, MatDot, PolyDot, EntangledPoly, Product, Uncoded };

inline const char* to_string(CodeFamily f) {
    switch (f) {
        case CodeFamily::Polynomial: return "polynomial";
        case CodeFamily::MatDot: return "matdot";
        case CodeFamily::PolyDot: return "polydot";
        case CodeFamily::EntangledPoly: return "entangled";
        case CodeFamily::Product: return "product";
        case CodeFamily::Uncoded: return "uncoded";
    }
    return "?";
}

inline CodeFamily code_family_from_string(const std::string& s) {
    if (s == "polynomial" || s == "poly") return CodeFamily::Polynomial;
    if (s == "matdot") return CodeFamily::MatDot;
    if (s == "polydot") return CodeFamily::PolyDot;
    if (s == "entangled" || s == "entangledpoly") return CodeFamily::EntangledPoly;
    if (s == "product") return CodeFamily::Product;
    if (s == "uncoded") return CodeFamily::Uncoded;
    throw std::invalid_argument("unknown code family: " + s);
}

// Raised when fewer than the recovery threshold of results are available.
struct NotYetRecoverable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool is_perfect_square(std::size_t n, std::size_t& root) {
    const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    for (std::size_t c : {r > 0 ? r - 1 : 0, r, r + 1})
        if (c * c == n) {
            root = c;
            return true;
        }
    return false;
}

}  // namespace detail

// Minimum number of completed encoded tasks that recovers the product.
// blockLength is only consulted by the Product and Uncoded families.
inline std::size_t recovery_threshold(CodeFamily family, const GridSpec& g,
                                      std::size_t blockLength = 0) {
    switch (family) {
        case CodeFamily::Polynomial:
            if (g.mz != 1)
                throw std::invalid_argument("polynomial codes require mz == 1");
            return g.mx * g.my;
        case CodeFamily::MatDot:
            if (g.mx != 1 || g.my != 1)
                throw std::invalid_argument("matdot codes require mx == my == 1");
            return 2 * g.mz - 1;
        case CodeFamily::PolyDot:
            return 2 * g.mx * g.mz * g.my - g.mx * g.my;
        case CodeFamily::EntangledPoly:
            return g.mx * g.mz * g.my + g.mz - 1;
        case CodeFamily::Product: {
            if (g.mz != 1)
                throw std::invalid_argument("product codes require mz == 1");
            std::size_t root = 0;
            if (blockLength == 0 || !detail::is_perfect_square(blockLength, root))
                throw std::invalid_argument("product codes require a square worker grid");
            return (g.mx + g.my - 2) * root - (g.mx - 1) * (g.my - 1) + 1;
        }
        case CodeFamily::Uncoded:
            if (blockLength != g.info_dim())
                throw std::invalid_argument("uncoded requires blockLength == mx*mz*my");
            return blockLength;
    }
    throw std::invalid_argument("unknown code family");
}

enum class PointKind { Chebyshev, Integer };

inline PointKind point_kind_from_string(const std::string& s) {
    if (s == "chebyshev") return PointKind::Chebyshev;
    if (s == "integer") return PointKind::Integer;
    throw std::invalid_argument("unknown point kind: " + s);
}

// Evaluation points for n encoded tasks. Integer points reproduce the
// worker-index choice; Chebyshev nodes keep the Vandermonde solve tame at
// larger recovery thresholds. The Chebyshev nodes are handed out in a fixed
// golden-stride order: completion sets are typically contiguous in index
// space (a worker's slots, or the first arrivals), and a strided hand-out
// maps such sets to well-spread nodes instead of a clustered sub-arc.
inline std::vector<double> evaluation_points(std::size_t n, PointKind kind) {
    std::vector<double> pts(n);
    if (kind == PointKind::Integer) {
        for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i + 1);
        return pts;
    }
    std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(0.618 * n));
    while (std::gcd(stride, n) != 1) ++stride;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = (i * stride) % n;
        pts[i] = std::cos((2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi /
                          (2.0 * static_cast<double>(n)));
    }
    return pts;
}

// Which factor carries the unit-stride exponents in a polynomial code.
// AMinor is the usual (i-1) + mx*(j-1) layout; BMinor strides the A side so
// that identically partitioned B factors encode identically across levels.
enum class PolyOrientation { AMinor, BMinor };

struct CodeSpec {
    CodeFamily family = CodeFamily::Polynomial;
    GridSpec grid;
    std::size_t blockLength = 0;
    std::size_t infoDim = 0;
    std::size_t recoveryThreshold = 0;
    std::vector<double> evalPoints;
    PolyOrientation orientation = PolyOrientation::AMinor;
    // shapes of the source factors, so decode can crop padding
    std::size_t aRows = 0, inner = 0, bCols = 0;
    double conditionCap = 1e10;
};

inline CodeSpec make_code_spec(CodeFamily family, const GridSpec& g, std::size_t blockLength,
                               std::vector<double> points,
                               PolyOrientation orientation = PolyOrientation::AMinor) {
    if (points.size() != blockLength)
        throw std::invalid_argument("need one evaluation point per encoded task");
    std::set<double> uniq(points.begin(), points.end());
    if (uniq.size() != points.size())
        throw std::invalid_argument("evaluation points must be pairwise distinct");
    CodeSpec spec;
    spec.family = family;
    spec.grid = g;
    spec.blockLength = blockLength;
    spec.infoDim = g.info_dim();
    spec.recoveryThreshold = recovery_threshold(family, g, blockLength);
    if (spec.recoveryThreshold > blockLength)
        throw std::invalid_argument("recovery threshold exceeds block length; job unrecoverable");
    spec.evalPoints = std::move(points);
    spec.orientation = orientation;
    return spec;
}

struct LoadProfile {
    double commIn = 0;   // reals master -> worker
    double comp = 0;     // multiply-accumulate ops
    double commOut = 0;  // reals worker -> master
};

// Per-worker loads from the closed forms.
inline LoadProfile load_profile(const GridSpec& g, const Dims& d) {
    const double nx = static_cast<double>(d.nx), nz = static_cast<double>(d.nz),
                 ny = static_cast<double>(d.ny);
    const double mx = static_cast<double>(g.mx), mz = static_cast<double>(g.mz),
                 my = static_cast<double>(g.my);
    LoadProfile p;
    p.commIn = nx * nz / (mx * mz) + ny * nz / (my * mz);
    p.comp = nx * nz * ny / (mx * mz * my);
    p.commOut = nx * ny / (mx * my);
    return p;
}

inline LoadProfile load_profile(const CodeSpec& spec, const Dims& d) {
    return load_profile(spec.grid, d);
}

// One encoded (A-hat, B-hat) pair. Factors are shared so that schemes whose
// levels reuse an encoded matrix do not duplicate it in memory or on the wire.
struct EncodedTask {
    std::shared_ptr<const Matrix> aHat;
    std::shared_ptr<const Matrix> bHat;
    double point = 0;
    std::size_t taskId = 0;
};

struct EncodedBatch {
    CodeSpec spec;
    std::vector<EncodedTask> tasks;
};

namespace detail {

// Zero-padded row blocks of m: ceil(rows/m) rows each.
inline std::vector<Matrix> padded_row_blocks(const Matrix& m, std::size_t nblocks) {
    const std::size_t h = (m.rows() + nblocks - 1) / nblocks;
    std::vector<Matrix> out;
    out.reserve(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        Matrix blk(h, m.cols());
        for (std::size_t i = 0; i < h; ++i) {
            const std::size_t src = b * h + i;
            if (src >= m.rows()) break;
            for (std::size_t j = 0; j < m.cols(); ++j) blk(i, j) = m(src, j);
        }
        out.push_back(std::move(blk));
    }
    return out;
}

inline std::vector<Matrix> padded_col_blocks(const Matrix& m, std::size_t nblocks) {
    const std::size_t w = (m.cols() + nblocks - 1) / nblocks;
    std::vector<Matrix> out;
    out.reserve(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        Matrix blk(m.rows(), w);
        for (std::size_t j = 0; j < w; ++j) {
            const std::size_t src = b * w + j;
            if (src >= m.cols()) continue;
            for (std::size_t i = 0; i < m.rows(); ++i) blk(i, j) = m(i, src);
        }
        out.push_back(std::move(blk));
    }
    return out;
}

inline double int_pow(double x, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i) r *= x;
    return r;
}

// sum_i blocks[i] * x^(stride*i)
inline Matrix eval_poly(const std::vector<Matrix>& blocks, double x, std::size_t stride) {
    Matrix acc(blocks.front().rows(), blocks.front().cols());
    for (std::size_t i = 0; i < blocks.size(); ++i)
        acc.axpy(int_pow(x, stride * i), blocks[i]);
    return acc;
}

}  // namespace detail

// Polynomial code over an inner-product partitioning (mz == 1):
//   AMinor:  A-hat(x) = sum_i A_i x^(i-1),      B-hat(x) = sum_j B_j x^(mx(j-1))
//   BMinor:  A-hat(x) = sum_i A_i x^(my(i-1)),  B-hat(x) = sum_j B_j x^(j-1)
inline EncodedBatch encode_polynomial(const Matrix& a, const Matrix& b, const GridSpec& g,
                                      std::vector<double> points,
                                      PolyOrientation orientation = PolyOrientation::AMinor) {
    if (a.cols() != b.rows()) throw std::invalid_argument("encode: inner dimensions differ");
    if (g.mz != 1) throw std::invalid_argument("polynomial codes require mz == 1");
    if (points.size() < g.mx * g.my)
        throw std::invalid_argument("need at least mx*my evaluation points");
    EncodedBatch out;
    out.spec = make_code_spec(CodeFamily::Polynomial, g, points.size(), points, orientation);
    out.spec.aRows = a.rows();
    out.spec.inner = a.cols();
    out.spec.bCols = b.cols();

    const auto ablocks = detail::padded_row_blocks(a, g.mx);
    const auto bblocks = detail::padded_col_blocks(b, g.my);
    const std::size_t strideA = orientation == PolyOrientation::AMinor ? 1 : g.my;
    const std::size_t strideB = orientation == PolyOrientation::AMinor ? g.mx : 1;
    // a degree-0 factor is the same at every point; share one copy
    std::shared_ptr<const Matrix> sharedA, sharedB;
    if (g.mx == 1) sharedA = std::make_shared<Matrix>(ablocks.front());
    if (g.my == 1) sharedB = std::make_shared<Matrix>(bblocks.front());
    for (std::size_t t = 0; t < out.spec.evalPoints.size(); ++t) {
        const double x = out.spec.evalPoints[t];
        auto aHat = sharedA ? sharedA
                            : std::make_shared<const Matrix>(detail::eval_poly(ablocks, x, strideA));
        auto bHat = sharedB ? sharedB
                            : std::make_shared<const Matrix>(detail::eval_poly(bblocks, x, strideB));
        out.tasks.push_back({std::move(aHat), std::move(bHat), x, t});
    }
    return out;
}

// MatDot code over an outer-product partitioning:
//   A-hat(x) = sum_i A_i x^(i-1),  B-hat(x) = sum_i B_i x^(mz-i)
// The x^(mz-1) coefficient of A-hat(x)B-hat(x) is the full product AB.
inline EncodedBatch encode_matdot(const Matrix& a, const Matrix& b, std::size_t mz,
                                  std::vector<double> points) {
    if (a.cols() != b.rows()) throw std::invalid_argument("encode: inner dimensions differ");
    if (mz == 0) throw std::invalid_argument("mz must be positive");
    const GridSpec g{1, mz, 1};
    if (points.size() < 2 * mz - 1)
        throw std::invalid_argument("need at least 2mz-1 evaluation points");
    EncodedBatch out;
    out.spec = make_code_spec(CodeFamily::MatDot, g, points.size(), points);
    out.spec.aRows = a.rows();
    out.spec.inner = a.cols();
    out.spec.bCols = b.cols();

    const auto ablocks = detail::padded_col_blocks(a, mz);
    auto bblocks = detail::padded_row_blocks(b, mz);
    std::reverse(bblocks.begin(), bblocks.end());  // B_i gets exponent mz-i
    std::shared_ptr<const Matrix> sharedA, sharedB;
    if (mz == 1) {
        sharedA = std::make_shared<Matrix>(ablocks.front());
        sharedB = std::make_shared<Matrix>(bblocks.front());
    }
    for (std::size_t t = 0; t < out.spec.evalPoints.size(); ++t) {
        const double x = out.spec.evalPoints[t];
        auto aHat = sharedA ? sharedA
                            : std::make_shared<const Matrix>(detail::eval_poly(ablocks, x, 1));
        auto bHat = sharedB ? sharedB
                            : std::make_shared<const Matrix>(detail::eval_poly(bblocks, x, 1));
        out.tasks.push_back({std::move(aHat), std::move(bHat), x, t});
    }
    return out;
}

// Rate-1 scheme: one raw block product per task, identified by index.
inline EncodedBatch encode_uncoded(const Matrix& a, const Matrix& b, const GridSpec& g) {
    if (a.cols() != b.rows()) throw std::invalid_argument("encode: inner dimensions differ");
    EncodedBatch out;
    std::vector<double> ids(g.info_dim());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<double>(i);
    out.spec = make_code_spec(CodeFamily::Uncoded, g, g.info_dim(), ids);
    out.spec.aRows = a.rows();
    out.spec.inner = a.cols();
    out.spec.bCols = b.cols();

    // distinct blocks built once; tasks sharing a block share the object
    const auto arow = detail::padded_row_blocks(a, g.mx);
    const auto bcol = detail::padded_col_blocks(b, g.my);
    std::vector<std::vector<std::shared_ptr<const Matrix>>> ab(g.mx), bb(g.my);
    for (std::size_t ix = 0; ix < g.mx; ++ix)
        for (auto& blk : detail::padded_col_blocks(arow[ix], g.mz))
            ab[ix].push_back(std::make_shared<const Matrix>(std::move(blk)));
    for (std::size_t iy = 0; iy < g.my; ++iy)
        for (auto& blk : detail::padded_row_blocks(bcol[iy], g.mz))
            bb[iy].push_back(std::make_shared<const Matrix>(std::move(blk)));
    std::size_t t = 0;
    for (std::size_t ix = 0; ix < g.mx; ++ix)
        for (std::size_t iz = 0; iz < g.mz; ++iz)
            for (std::size_t iy = 0; iy < g.my; ++iy) {
                out.tasks.push_back({ab[ix][iz], bb[iy][iz], static_cast<double>(t), t});
                ++t;
            }
    return out;
}

inline EncodedBatch encode(CodeFamily family, const Matrix& a, const Matrix& b,
                           const GridSpec& g, std::vector<double> points,
                           PolyOrientation orientation = PolyOrientation::AMinor) {
    switch (family) {
        case CodeFamily::Polynomial: return encode_polynomial(a, b, g, std::move(points), orientation);
        case CodeFamily::MatDot: return encode_matdot(a, b, g.mz, std::move(points));
        case CodeFamily::Uncoded: return encode_uncoded(a, b, g);
        default:
            throw std::invalid_argument(std::string(to_string(family)) +
                                        " codes are supported for analytics only");
    }
}

struct DecodeResult {
    Matrix product;
    double conditionEstimate = 0.0;
    bool illConditioned = false;
};

namespace detail {

// 1-norm condition estimate of the Vandermonde matrix on the given points,
// via LU with partial pivoting and explicit inverse columns.
inline double vandermonde_condition(const std::vector<double>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> v(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v[i * n + j] = int_pow(pts[i], j);

    double normA = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(v[i * n + j]);
        normA = std::max(normA, s);
    }

    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(v[i * n + k]) > std::abs(v[p * n + k])) p = i;
        if (v[p * n + k] == 0.0) return std::numeric_limits<double>::infinity();
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(v[p * n + j], v[k * n + j]);
            std::swap(piv[p], piv[k]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i * n + k] /= v[k * n + k];
            for (std::size_t j = k + 1; j < n; ++j) v[i * n + j] -= v[i * n + k] * v[k * n + j];
        }
    }

    double normInv = 0.0;
    std::vector<double> x(n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t i = 0; i < n; ++i) x[i] = piv[i] == col ? 1.0 : 0.0;
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= v[i * n + j] * x[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) x[i] -= v[i * n + j] * x[j];
            x[i] /= v[i * n + i];
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i]);
        normInv = std::max(normInv, s);
    }
    return normA * normInv;
}

// Coefficients of the degree-(n-1) matrix polynomial through the samples:
// Newton divided differences, then a Horner expansion into the monomial
// basis. O(n^2) matrix operations.
inline std::vector<Matrix> interpolate_coefficients(
    const std::vector<std::pair<double, Matrix>>& samples) {
    const std::size_t n = samples.size();
    std::vector<double> xs(n);
    std::vector<Matrix> dd;
    dd.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = samples[i].first;
        dd.push_back(samples[i].second);
    }
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = n; i-- > j;) {
            dd[i] -= dd[i - 1];
            dd[i] *= 1.0 / (xs[i] - xs[i - j]);
        }

    const std::size_t rows = dd[0].rows(), cols = dd[0].cols();
    std::vector<Matrix> mono;
    mono.reserve(n);
    mono.push_back(std::move(dd[n - 1]));
    for (std::size_t step = n - 1; step-- > 0;) {
        // multiply by (x - xs[step]) and add dd[step]
        mono.push_back(Matrix(rows, cols));
        for (std::size_t k = mono.size(); k-- > 1;) {
            mono[k] *= -xs[step];
            mono[k] += mono[k - 1];
        }
        mono[0] *= -xs[step];
        mono[0] += dd[step];
    }
    return mono;
}

}  // namespace detail

// Recover the product from completed (point, A-hat*B-hat) pairs. Uses the
// first recoveryThreshold completions handed in; throws NotYetRecoverable if
// there are fewer. A Vandermonde condition estimate above spec.conditionCap
// flags the result instead of failing it.
inline DecodeResult decode(const CodeSpec& spec,
                           const std::vector<std::pair<double, Matrix>>& completed) {
    if (spec.aRows == 0 || spec.bCols == 0)
        throw std::invalid_argument("decode: spec carries no source shapes");

    if (spec.family == CodeFamily::Uncoded) {
        if (completed.size() < spec.infoDim)
            throw NotYetRecoverable("uncoded: need all block products");
        const std::size_t mx = spec.grid.mx, mz = spec.grid.mz, my = spec.grid.my;
        std::vector<std::vector<Matrix>> grid(mx);
        std::vector<bool> seen(spec.infoDim, false);
        for (const auto& [pt, prod] : completed) {
            const auto id = static_cast<std::size_t>(pt);
            if (id >= spec.infoDim || seen[id]) continue;
            seen[id] = true;
            const std::size_t iy = id % my;
            const std::size_t ix = id / (mz * my);
            auto& row = grid[ix];
            if (row.empty()) row.assign(my, Matrix(prod.rows(), prod.cols()));
            row[iy] += prod;
        }
        for (std::size_t id = 0; id < spec.infoDim; ++id)
            if (!seen[id]) throw NotYetRecoverable("uncoded: missing block " + std::to_string(id));
        DecodeResult res;
        res.product = extract_block(concat_blocks(grid), {{0, spec.aRows}, {0, spec.bCols}});
        res.conditionEstimate = 1.0;
        return res;
    }

    const std::size_t r = spec.recoveryThreshold;
    if (completed.size() < r)
        throw NotYetRecoverable("have " + std::to_string(completed.size()) + " of " +
                                std::to_string(r) + " results");
    std::vector<std::pair<double, Matrix>> use(completed.begin(),
                                               completed.begin() + static_cast<std::ptrdiff_t>(r));
    std::vector<double> pts(r);
    for (std::size_t i = 0; i < r; ++i) {
        pts[i] = use[i].first;
        if (use[i].second.rows() != use[0].second.rows() ||
            use[i].second.cols() != use[0].second.cols())
            throw std::invalid_argument("decode: product shapes differ");
    }
    if (std::set<double>(pts.begin(), pts.end()).size() != pts.size())
        throw std::invalid_argument("decode: duplicate evaluation points");

    const auto coeffs = detail::interpolate_coefficients(use);
    DecodeResult res;
    res.conditionEstimate = detail::vandermonde_condition(pts);
    res.illConditioned = !(res.conditionEstimate <= spec.conditionCap);

    if (spec.family == CodeFamily::MatDot) {
        res.product = coeffs[spec.grid.mz - 1];
        return res;
    }
    if (spec.family == CodeFamily::Polynomial) {
        const std::size_t mx = spec.grid.mx, my = spec.grid.my;
        std::vector<std::vector<Matrix>> grid(mx);
        for (std::size_t i = 0; i < mx; ++i) {
            grid[i].reserve(my);
            for (std::size_t j = 0; j < my; ++j) {
                const std::size_t idx = spec.orientation == PolyOrientation::AMinor
                                            ? i + mx * j
                                            : my * i + j;
                grid[i].push_back(coeffs[idx]);
            }
        }
        res.product = extract_block(concat_blocks(grid), {{0, spec.aRows}, {0, spec.bCols}});
        return res;
    }
    throw std::invalid_argument(std::string(to_string(spec.family)) +
                                " codes are supported for analytics only");
}

}  // namespace hiercc
