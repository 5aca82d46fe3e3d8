#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercc/matrix.hpp"

namespace hiercc {

// Edge lengths of the Nx x Nz x Ny computation cuboid. Each unit cube
// (ix, iz, iy) is one multiply-accumulate A(ix,iz)*B(iz,iy).
struct Dims {
    std::size_t nx = 1;
    std::size_t nz = 1;
    std::size_t ny = 1;

    std::size_t volume() const { return nx * nz * ny; }

    void validate() const {
        if (nx == 0 || nz == 0 || ny == 0)
            throw std::invalid_argument("dims must be positive");
    }
};

// Slice counts (Mx, Mz, My) along the three axes.
struct GridSpec {
    std::size_t mx = 1;
    std::size_t mz = 1;
    std::size_t my = 1;

    std::size_t info_dim() const { return mx * mz * my; }

    void validate_within(const Dims& d) const {
        if (mx == 0 || mz == 0 || my == 0)
            throw std::invalid_argument("grid slice counts must be positive");
        if (mx > d.nx || mz > d.nz || my > d.ny)
            throw std::invalid_argument("grid exceeds cuboid dims");
    }
};

inline bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.mx == b.mx && a.mz == b.mz && a.my == b.my;
}

enum class PartitionClass {
    Repetition,   // no slicing: (N,N) repetition
    MatDot,       // z only
    VecMtx,       // x only
    MtxVec,       // y only
    PolyProduct,  // x and y
    XZ,           // x and z
    ZY,           // z and y
    PolyDot,      // x, z and y
};

inline PartitionClass classify_partition(const GridSpec& g) {
    const bool x = g.mx > 1, z = g.mz > 1, y = g.my > 1;
    if (!x && !z && !y) return PartitionClass::Repetition;
    if (!x && z && !y) return PartitionClass::MatDot;
    if (x && !z && !y) return PartitionClass::VecMtx;
    if (!x && !z && y) return PartitionClass::MtxVec;
    if (x && !z && y) return PartitionClass::PolyProduct;
    if (x && z && !y) return PartitionClass::XZ;
    if (!x && z && y) return PartitionClass::ZY;
    return PartitionClass::PolyDot;
}

inline const char* to_string(PartitionClass c) {
    switch (c) {
        case PartitionClass::Repetition: return "repetition";
        case PartitionClass::MatDot: return "matdot";
        case PartitionClass::VecMtx: return "vecmtx";
        case PartitionClass::MtxVec: return "mtxvec";
        case PartitionClass::PolyProduct: return "poly/product";
        case PartitionClass::XZ: return "xz";
        case PartitionClass::ZY: return "zy";
        case PartitionClass::PolyDot: return "polydot";
    }
    return "?";
}

// One subcuboid of basic operations, assigned to a single sub-computation.
struct InformationBlock {
    IndexRange x, z, y;
    std::size_t level = 0;           // 0 for single-level schemes
    std::size_t cx = 0, cz = 0, cy = 0;  // position within the owning task block

    std::size_t volume() const { return x.size() * z.size() * y.size(); }
};

// First-stage subcuboid owned by one level of a multilevel scheme.
struct TaskBlock {
    std::size_t level = 0;
    IndexRange x, z, y;
    GridSpec grid;

    std::size_t volume() const { return x.size() * z.size() * y.size(); }
};

// Split [0, n) into m intervals whose sizes differ by at most one; the first
// (n mod m) intervals take the extra unit.
inline std::vector<IndexRange> split_axis(std::size_t n, std::size_t m) {
    if (m == 0 || m > n) throw std::invalid_argument("split_axis: need 1 <= m <= n");
    const std::size_t base = n / m, extra = n % m;
    std::vector<IndexRange> out;
    out.reserve(m);
    std::size_t lo = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        out.push_back({lo, lo + len});
        lo += len;
    }
    return out;
}

// Slice the cuboid into mx*mz*my disjoint information blocks covering it.
inline std::vector<InformationBlock> partition_grid(const Dims& d, const GridSpec& g,
                                                    std::size_t level = 0) {
    d.validate();
    g.validate_within(d);
    const auto xs = split_axis(d.nx, g.mx);
    const auto zs = split_axis(d.nz, g.mz);
    const auto ys = split_axis(d.ny, g.my);
    std::vector<InformationBlock> blocks;
    blocks.reserve(g.info_dim());
    for (std::size_t ix = 0; ix < g.mx; ++ix)
        for (std::size_t iz = 0; iz < g.mz; ++iz)
            for (std::size_t iy = 0; iy < g.my; ++iy)
                blocks.push_back({xs[ix], zs[iz], ys[iy], level, ix, iz, iy});
    return blocks;
}

// Inputs for one level of the layered partitioner.
struct LevelShape {
    std::size_t d = 1;   // information dimension of the level
    std::size_t r = 1;   // recovery threshold (carried through, not used geometrically)
    GridSpec grid;       // (Mxl, Mzl, Myl), with d == grid.info_dim()
};

struct LayeredPartition {
    std::vector<TaskBlock> taskBlocks;
    std::vector<InformationBlock> infoBlocks;
    std::size_t residual = 0;  // unit cubes left to the master
};

enum class Axis { X, Z, Y };

// Layer-by-layer slab partitioner: task block l spans the y-range
// [floor(ny/dSum) * sum_{i<l} d_i, floor(ny/dSum) * sum_{i<=l} d_i) over full
// x and z, then is subdivided by its per-level grid. Levels with d == 0 are
// skipped (empty task block). The uncovered tail goes to the master.
inline LayeredPartition layered_partition(const Dims& d, const std::vector<LevelShape>& levels,
                                          std::size_t dSum) {
    d.validate();
    std::size_t total = 0;
    for (const auto& lv : levels) {
        if (lv.d != 0 && lv.d != lv.grid.info_dim())
            throw std::invalid_argument("layered_partition: d_l != Mxl*Mzl*Myl");
        total += lv.d;
    }
    if (total != dSum) throw std::invalid_argument("layered_partition: sum d_l != dSum");
    if (dSum > d.ny) throw std::invalid_argument("layered_partition: dSum exceeds ny");

    const std::size_t unit = d.ny / dSum;
    LayeredPartition out;
    std::size_t yoff = 0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto& lv = levels[l];
        if (lv.d == 0) continue;
        const IndexRange yr{yoff, yoff + unit * lv.d};
        yoff = yr.hi;
        TaskBlock tb{l, {0, d.nx}, {0, d.nz}, yr, lv.grid};
        const Dims sub{tb.x.size(), tb.z.size(), tb.y.size()};
        auto blocks = partition_grid(sub, lv.grid, l);
        for (auto& b : blocks) {
            b.x = {tb.x.lo + b.x.lo, tb.x.lo + b.x.hi};
            b.z = {tb.z.lo + b.z.lo, tb.z.lo + b.z.hi};
            b.y = {tb.y.lo + b.y.lo, tb.y.lo + b.y.hi};
        }
        out.infoBlocks.insert(out.infoBlocks.end(), blocks.begin(), blocks.end());
        out.taskBlocks.push_back(tb);
    }
    out.residual = d.nx * d.nz * (d.ny - yoff);
    return out;
}

namespace detail {

inline Dims permute_to_y(const Dims& d, Axis a) {
    switch (a) {
        case Axis::Y: return d;
        case Axis::X: return {d.ny, d.nz, d.nx};
        case Axis::Z: return {d.nx, d.ny, d.nz};
    }
    return d;
}

inline GridSpec permute_to_y(const GridSpec& g, Axis a) {
    switch (a) {
        case Axis::Y: return g;
        case Axis::X: return {g.my, g.mz, g.mx};
        case Axis::Z: return {g.mx, g.my, g.mz};
    }
    return g;
}

template <typename Block>
inline void unpermute_block(Block& b, Axis a) {
    switch (a) {
        case Axis::Y: break;
        case Axis::X: std::swap(b.x, b.y); break;
        case Axis::Z: std::swap(b.z, b.y); break;
    }
}

}  // namespace detail

// Same slab routine with the slabs cut along the given axis; used for the
// Mx- and Mz-dominated multilevel layouts.
inline LayeredPartition layered_partition_axis(const Dims& d, std::vector<LevelShape> levels,
                                               std::size_t dSum, Axis axis) {
    const Dims pd = detail::permute_to_y(d, axis);
    for (auto& lv : levels) lv.grid = detail::permute_to_y(lv.grid, axis);
    LayeredPartition out = layered_partition(pd, levels, dSum);
    for (auto& tb : out.taskBlocks) {
        detail::unpermute_block(tb, axis);
        tb.grid = detail::permute_to_y(tb.grid, axis);  // permutation is an involution
    }
    for (auto& ib : out.infoBlocks) {
        detail::unpermute_block(ib, axis);
        switch (axis) {
            case Axis::Y: break;
            case Axis::X: std::swap(ib.cx, ib.cy); break;
            case Axis::Z: std::swap(ib.cz, ib.cy); break;
        }
    }
    return out;
}

// Uniform-cell layout: slice the cuboid into a Gx x 1 x Gy grid of equal
// cells and let levels claim cells greedily, y-column by y-column, splitting
// a partially used column along x. Each level's claim must form a box; the
// per-level grid is the box shape in cells. Reproduces the two-step task
// block layouts whose levels tile a common information-block grid.
inline LayeredPartition packed_partition(const Dims& d, std::size_t gx, std::size_t gy,
                                         const std::vector<std::size_t>& levelCells) {
    d.validate();
    std::size_t total = 0;
    for (auto c : levelCells) total += c;
    if (total != gx * gy)
        throw std::invalid_argument("packed_partition: cells do not tile the grid");
    const auto xs = split_axis(d.nx, gx);
    const auto ys = split_axis(d.ny, gy);

    LayeredPartition out;
    std::size_t col = 0, xoff = 0;  // cursor in cell coordinates
    for (std::size_t l = 0; l < levelCells.size(); ++l) {
        const std::size_t want = levelCells[l];
        if (want == 0) continue;
        TaskBlock tb;
        tb.level = l;
        tb.z = {0, d.nz};
        if (xoff == 0 && want % gx == 0) {
            // whole consecutive columns
            const std::size_t ncols = want / gx;
            tb.x = {xs.front().lo, xs.back().hi};
            tb.y = {ys[col].lo, ys[col + ncols - 1].hi};
            tb.grid = {gx, 1, ncols};
            col += ncols;
        } else if (xoff + want <= gx) {
            // contiguous x-run within one column
            tb.x = {xs[xoff].lo, xs[xoff + want - 1].hi};
            tb.y = {ys[col].lo, ys[col].hi};
            tb.grid = {want, 1, 1};
            xoff += want;
            if (xoff == gx) {
                xoff = 0;
                ++col;
            }
        } else {
            throw std::invalid_argument(
                "packed_partition: level " + std::to_string(l + 1) +
                " does not form a box under column-major claiming");
        }
        const Dims sub{tb.x.size(), tb.z.size(), tb.y.size()};
        auto blocks = partition_grid(sub, tb.grid, l);
        for (auto& b : blocks) {
            b.x = {tb.x.lo + b.x.lo, tb.x.lo + b.x.hi};
            b.y = {tb.y.lo + b.y.lo, tb.y.lo + b.y.hi};
        }
        out.infoBlocks.insert(out.infoBlocks.end(), blocks.begin(), blocks.end());
        out.taskBlocks.push_back(tb);
    }
    out.residual = 0;  // cells cover the cuboid exactly
    return out;
}

}  // namespace hiercc
