#pragma once

// Cell complex of a discretized relative braid class and its Conley index pair.
//
// Every free anchor x^k_i either sits on one of the fixed values at slot i
// (skeleton anchors and the boundary markers -1, +1) or inside one of the open
// gaps between them. Free anchors sharing a gap carry a weak order. A cell is
// the set of configurations with a given such pattern; top cells are the
// generic ones, and each of them lies in a single braid class.
//
// A codimension-one face is one equality u = v at slot i. It is interior to the
// class when the neighbours straddle, (u_{i-1}-v_{i-1})(u_{i+1}-v_{i+1}) < 0, and
// a tangency otherwise. Crossing a tangency changes the crossing number by 2;
// faces through which it would drop are exit faces.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "discrete_braid.hpp"

namespace braidfloer {

class ImproperClassError : public std::runtime_error {
public:
    ImproperClassError(const std::string& what, std::string witness)
        : std::runtime_error(what), witness_(std::move(witness)) {}
    const std::string& witness() const { return witness_; }

private:
    std::string witness_;
};

/// Encoded cell: two bytes per free coordinate (slot-major), `level` then
/// `rank`. Even level 2f pins the coordinate to fixed object f at its slot,
/// odd level 2g+1 puts it in gap g. Ranks order coordinates inside a gap;
/// equal ranks mean equal values.
using CellKey = std::string;

struct StrandRef {
    enum class Kind : std::uint8_t { Free, Skeleton, Lower, Upper };
    Kind kind = Kind::Free;
    int strand = 0;

    friend bool operator==(const StrandRef&, const StrandRef&) = default;
};

inline std::string describe(const StrandRef& r) {
    switch (r.kind) {
    case StrandRef::Kind::Free: return "free strand " + std::to_string(r.strand);
    case StrandRef::Kind::Skeleton: return "skeleton strand " + std::to_string(r.strand);
    case StrandRef::Kind::Lower: return "boundary -1";
    case StrandRef::Kind::Upper: return "boundary +1";
    }
    return "?";
}

/// A full free strand cycle that coincides with another strand or the boundary.
struct Collapse {
    CellKey cell;
    int free_strand = 0;
    StrandRef onto;

    std::string describe() const { return "free strand " + std::to_string(free_strand) + " collapses onto " + braidfloer::describe(onto); }
};

/// Fixed objects per slot and the combinatorics shared by every cell.
class ClassGeometry {
public:
    explicit ClassGeometry(DiscreteRelativeBraid rb) : rb_(std::move(rb)) {
        n_ = rb_.free.strands();
        d_ = rb_.period();
        if (d_ < 2) throw BraidError("discrete braids need period >= 2");
        if (rb_.skeleton.strands() > 0 && rb_.skeleton.period() != d_)
            throw BraidError("free strands and skeleton have different periods");
        const int m = rb_.skeleton.strands();
        if (m + 2 > 127) throw BraidError("too many skeleton strands");
        fixed_.resize(static_cast<std::size_t>(d_));
        fixed_index_.assign(static_cast<std::size_t>(d_), std::vector<int>(static_cast<std::size_t>(m), -1));
        for (int i = 0; i < d_; ++i) {
            auto& f = fixed_[static_cast<std::size_t>(i)];
            f.push_back({-1.0, {StrandRef::Kind::Lower, -1}});
            for (int b = 0; b < m; ++b) f.push_back({rb_.skeleton.anchors()[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)], {StrandRef::Kind::Skeleton, b}});
            f.push_back({1.0, {StrandRef::Kind::Upper, -1}});
            std::sort(f.begin(), f.end(), [](const Fixed& a, const Fixed& b) { return a.value < b.value; });
            for (std::size_t j = 0; j + 1 < f.size(); ++j)
                if (f[j].value == f[j + 1].value) throw TransversalityError("skeleton strands coincide at slot " + std::to_string(i));
            for (std::size_t j = 0; j < f.size(); ++j)
                if (f[j].ref.kind == StrandRef::Kind::Skeleton) fixed_index_[static_cast<std::size_t>(i)][static_cast<std::size_t>(f[j].ref.strand)] = static_cast<int>(j);
        }
        skeleton_crossings_ = rb_.skeleton.strands() > 1 ? total_crossing_number(rb_.skeleton) : 0;
    }

    int free_strands() const { return n_; }
    int period() const { return d_; }
    int coordinates() const { return n_ * d_; }
    const DiscreteRelativeBraid& braid() const { return rb_; }
    int fixed_count(int slot) const { return static_cast<int>(fixed_[static_cast<std::size_t>(slot)].size()); }
    StrandRef fixed_ref(int slot, int f) const { return fixed_[static_cast<std::size_t>(slot)][static_cast<std::size_t>(f)].ref; }
    double fixed_value(int slot, int f) const { return fixed_[static_cast<std::size_t>(slot)][static_cast<std::size_t>(f)].value; }

    static int level(const CellKey& c, int coord) { return static_cast<unsigned char>(c[static_cast<std::size_t>(2 * coord)]); }
    static int rank(const CellKey& c, int coord) { return static_cast<unsigned char>(c[static_cast<std::size_t>(2 * coord + 1)]); }
    static void set(CellKey& c, int coord, int level, int rank) {
        c[static_cast<std::size_t>(2 * coord)] = static_cast<char>(level);
        c[static_cast<std::size_t>(2 * coord + 1)] = static_cast<char>(rank);
    }
    int coord(int slot, int k) const { return slot * n_ + k; }

    /// The same strand one slot to the left (-1) or right (+1), with wrap.
    std::pair<StrandRef, int> step(StrandRef r, int slot, int dir) const {
        int s = slot + dir;
        if (s >= 0 && s < d_) return {r, s};
        s = (s + d_) % d_;
        if (r.kind == StrandRef::Kind::Free) {
            const auto& cl = rb_.free.closure();
            r.strand = dir > 0 ? cl(r.strand) : cl.inverse()(r.strand);
        } else if (r.kind == StrandRef::Kind::Skeleton) {
            const auto& cl = rb_.skeleton.closure();
            r.strand = dir > 0 ? cl(r.strand) : cl.inverse()(r.strand);
        }
        return {r, s};
    }

    /// Position key of a strand at a slot within a cell.
    std::pair<int, int> position(const CellKey& c, StrandRef r, int slot) const {
        switch (r.kind) {
        case StrandRef::Kind::Free: {
            const int x = coord(slot, r.strand);
            return {level(c, x), rank(c, x)};
        }
        case StrandRef::Kind::Skeleton:
            return {2 * fixed_index_[static_cast<std::size_t>(slot)][static_cast<std::size_t>(r.strand)], 0};
        case StrandRef::Kind::Lower: return {0, 0};
        case StrandRef::Kind::Upper: return {2 * (fixed_count(slot) - 1), 0};
        }
        return {0, 0};
    }

    int compare(const CellKey& c, StrandRef a, StrandRef b, int slot) const {
        const auto pa = position(c, a, slot), pb = position(c, b, slot);
        return (pa > pb) - (pa < pb);
    }

    /// Sign of a - b at the neighbouring slot (dir = -1 or +1).
    int compare_neighbour(const CellKey& c, StrandRef a, StrandRef b, int slot, int dir) const {
        auto [na, sa] = step(a, slot, dir);
        auto [nb, sb] = step(b, slot, dir);
        (void)sb;
        return compare(c, na, nb, sa);
    }

    int dimension(const CellKey& c) const {
        int dim = 0;
        for (int i = 0; i < d_; ++i) {
            // number of distinct (gap, rank) classes at this slot
            std::vector<std::pair<int, int>> seen;
            for (int k = 0; k < n_; ++k) {
                const int x = coord(i, k);
                if (level(c, x) % 2 == 1) seen.emplace_back(level(c, x), rank(c, x));
            }
            std::sort(seen.begin(), seen.end());
            dim += static_cast<int>(std::unique(seen.begin(), seen.end()) - seen.begin());
        }
        return dim;
    }

    /// Crossing number of a generic cell (free-involved pairs plus the skeleton).
    std::int64_t crossing_number(const CellKey& c) const {
        std::int64_t count = skeleton_crossings_;
        const int m = rb_.skeleton.strands();
        for (int i = 0; i < d_; ++i) {
            for (int k = 0; k < n_; ++k) {
                const StrandRef a{StrandRef::Kind::Free, k};
                auto pair_cross = [&](StrandRef b) {
                    if (compare(c, a, b, i) != compare_neighbour(c, a, b, i, +1)) ++count;
                };
                for (int l = k + 1; l < n_; ++l) pair_cross({StrandRef::Kind::Free, l});
                for (int b = 0; b < m; ++b) pair_cross({StrandRef::Kind::Skeleton, b});
            }
        }
        return count;
    }

    /// The generic cell containing the free anchors of the braid. Anchors lying
    /// exactly on another anchor are nudged upward.
    CellKey cell_of_braid() const { return cell_of(rb_.free); }

    CellKey cell_of(const DiscreteBraid& free) const {
        if (free.strands() != n_ || (n_ > 0 && free.period() != d_)) throw BraidError("free braid does not match class geometry");
        CellKey c(static_cast<std::size_t>(2 * coordinates()), '\0');
        for (int i = 0; i < d_; ++i) {
            std::vector<std::pair<double, int>> in_gap;
            for (int k = 0; k < n_; ++k) {
                const double v = free.anchors()[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
                if (v <= -1.0 || v >= 1.0) throw BraidError("free anchor on the boundary");
                int g = 0;
                while (g + 1 < fixed_count(i) && fixed_value(i, g + 1) <= v) ++g;
                set(c, coord(i, k), 2 * g + 1, 0);
                in_gap.emplace_back(v, k);
            }
            std::sort(in_gap.begin(), in_gap.end());
            for (std::size_t a = 0; a < in_gap.size(); ++a) {
                int r = 0;
                const int ka = in_gap[a].second;
                for (std::size_t b = 0; b < a; ++b)
                    if (level(c, coord(i, in_gap[b].second)) == level(c, coord(i, ka))) ++r;
                set(c, coord(i, ka), level(c, coord(i, ka)), r);
            }
        }
        return c;
    }

    /// Codimension-one faces of any cell.
    std::vector<CellKey> faces(const CellKey& c) const {
        std::vector<CellKey> out;
        for (int i = 0; i < d_; ++i) {
            for (int g = 0; g + 1 < fixed_count(i); ++g) {
                const int lv = 2 * g + 1;
                int top = -1;
                for (int k = 0; k < n_; ++k)
                    if (level(c, coord(i, k)) == lv) top = std::max(top, rank(c, coord(i, k)));
                if (top < 0) continue;
                // lowest class onto the lower wall
                {
                    CellKey f = c;
                    for (int k = 0; k < n_; ++k) {
                        const int x = coord(i, k);
                        if (level(c, x) != lv) continue;
                        if (rank(c, x) == 0) set(f, x, 2 * g, 0);
                        else set(f, x, lv, rank(c, x) - 1);
                    }
                    out.push_back(std::move(f));
                }
                // highest class onto the upper wall
                {
                    CellKey f = c;
                    for (int k = 0; k < n_; ++k) {
                        const int x = coord(i, k);
                        if (level(c, x) == lv && rank(c, x) == top) set(f, x, 2 * g + 2, 0);
                    }
                    out.push_back(std::move(f));
                }
                // adjacent classes merge
                for (int j = 0; j < top; ++j) {
                    CellKey f = c;
                    for (int k = 0; k < n_; ++k) {
                        const int x = coord(i, k);
                        if (level(c, x) == lv && rank(c, x) > j) set(f, x, lv, rank(c, x) - 1);
                    }
                    out.push_back(std::move(f));
                }
            }
        }
        return out;
    }

    /// Scans a cell for a free strand cycle that coincides everywhere with a
    /// skeleton strand, another free strand, or a boundary marker.
    std::optional<Collapse> find_collapse(const CellKey& c) const {
        for (int k = 0; k < n_; ++k) {
            const StrandRef start{StrandRef::Kind::Free, k};
            std::vector<StrandRef> partners;
            const int x0 = coord(0, k);
            if (level(c, x0) % 2 == 0) {
                partners.push_back(fixed_ref(0, level(c, x0) / 2));
            } else {
                for (int l = 0; l < n_; ++l)
                    if (l != k && level(c, coord(0, l)) == level(c, x0) && rank(c, coord(0, l)) == rank(c, x0))
                        partners.push_back({StrandRef::Kind::Free, l});
            }
            for (StrandRef p : partners) {
                StrandRef a = start, b = p;
                int slot = 0;
                bool all_equal = true;
                do {
                    if (compare(c, a, b, slot) != 0) {
                        all_equal = false;
                        break;
                    }
                    auto na = step(a, slot, +1);
                    auto nb = step(b, slot, +1);
                    a = na.first;
                    b = nb.first;
                    slot = na.second;
                } while (!(a == start && b == p && slot == 0));
                if (all_equal) return Collapse{c, k, p};
            }
        }
        return std::nullopt;
    }

    /// Equality objects and neighbour sign of a codimension-one face of a top cell.
    struct TopFace {
        CellKey face;
        CellKey across;  // neighbouring top cell, empty when there is none
        StrandRef lower_obj, upper_obj;
        int slot = 0;
        bool interior = false;  // neighbours straddle
        bool exit = false;      // tangency with the crossing number dropping across it
    };

    std::vector<TopFace> top_faces(const CellKey& c) const {
        std::vector<TopFace> out;
        for (int i = 0; i < d_; ++i) {
            for (int g = 0; g + 1 < fixed_count(i); ++g) {
                const int lv = 2 * g + 1;
                std::vector<int> members;  // free strands in gap, by rank
                for (int k = 0; k < n_; ++k)
                    if (level(c, coord(i, k)) == lv) members.push_back(k);
                if (members.empty()) continue;
                std::sort(members.begin(), members.end(), [&](int a, int b) { return rank(c, coord(i, a)) < rank(c, coord(i, b)); });
                const int r = static_cast<int>(members.size());

                auto finish = [&](TopFace tf, auto&& make_across) {
                    const int left = compare_neighbour(c, tf.upper_obj, tf.lower_obj, i, -1);
                    const int right = compare_neighbour(c, tf.upper_obj, tf.lower_obj, i, +1);
                    tf.slot = i;
                    tf.interior = left * right < 0;
                    // In the top cell upper_obj lies above lower_obj.
                    if (!tf.interior) tf.exit = (left != 1);
                    tf.across = make_across(tf.face);
                    out.push_back(std::move(tf));
                };

                // lowest member onto fixed g
                {
                    TopFace tf;
                    tf.face = c;
                    const int x = coord(i, members.front());
                    set(tf.face, x, 2 * g, 0);
                    for (int j = 1; j < r; ++j) set(tf.face, coord(i, members[static_cast<std::size_t>(j)]), lv, j - 1);
                    tf.upper_obj = {StrandRef::Kind::Free, members.front()};
                    tf.lower_obj = fixed_ref(i, g);
                    finish(std::move(tf), [&](const CellKey& face) -> CellKey {
                        if (g == 0) return {};
                        CellKey a = face;
                        int below = 0;
                        for (int k = 0; k < n_; ++k)
                            if (level(c, coord(i, k)) == lv - 2) ++below;
                        set(a, x, lv - 2, below);
                        return a;
                    });
                }
                // highest member onto fixed g+1
                {
                    TopFace tf;
                    tf.face = c;
                    const int x = coord(i, members.back());
                    set(tf.face, x, 2 * g + 2, 0);
                    tf.upper_obj = fixed_ref(i, g + 1);
                    tf.lower_obj = {StrandRef::Kind::Free, members.back()};
                    finish(std::move(tf), [&](const CellKey& face) -> CellKey {
                        if (g + 2 >= fixed_count(i)) return {};
                        CellKey a = face;
                        for (int k = 0; k < n_; ++k) {
                            const int y = coord(i, k);
                            if (level(c, y) == lv + 2) set(a, y, lv + 2, rank(c, y) + 1);
                        }
                        set(a, x, lv + 2, 0);
                        return a;
                    });
                }
                // neighbours in the gap merge
                for (int j = 0; j + 1 < r; ++j) {
                    TopFace tf;
                    tf.face = c;
                    for (int t = j + 1; t < r; ++t) set(tf.face, coord(i, members[static_cast<std::size_t>(t)]), lv, t - 1);
                    tf.lower_obj = {StrandRef::Kind::Free, members[static_cast<std::size_t>(j)]};
                    tf.upper_obj = {StrandRef::Kind::Free, members[static_cast<std::size_t>(j + 1)]};
                    finish(std::move(tf), [&](const CellKey&) -> CellKey {
                        CellKey a = c;
                        set(a, coord(i, members[static_cast<std::size_t>(j)]), lv, j + 1);
                        set(a, coord(i, members[static_cast<std::size_t>(j + 1)]), lv, j);
                        return a;
                    });
                }
            }
        }
        return out;
    }

private:
    struct Fixed {
        double value;
        StrandRef ref;
    };

    DiscreteRelativeBraid rb_;
    int n_ = 0;
    int d_ = 0;
    std::vector<std::vector<Fixed>> fixed_;
    std::vector<std::vector<int>> fixed_index_;
    std::int64_t skeleton_crossings_ = 0;
};

struct ComplexCell {
    CellKey key;
    int dim = 0;
    bool exit = false;
    std::vector<std::uint32_t> faces;
};

/// Connected component of the braid class containing a representative,
/// together with the closure of its top cells.
struct BraidClassComponent {
    std::shared_ptr<const ClassGeometry> geometry;
    std::vector<std::uint32_t> top_cells;  // indices into `closure`
    std::vector<ComplexCell> closure;
    std::vector<CellKey> exit_faces;
    std::int64_t crossing_number = 0;
    bool proper = true;
    std::optional<Collapse> witness;
    // bookkeeping checked by the invariants
    bool crossing_constant = true;
    std::size_t tangency_faces = 0;
    std::size_t tangency_jump_violations = 0;
};

struct IndexPair {
    std::shared_ptr<const ClassGeometry> geometry;
    std::vector<ComplexCell> cells;  // N; cells[i].exit marks N^-
    std::int64_t crossing_number = 0;

    std::size_t exit_count() const {
        return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const ComplexCell& c) { return c.exit; }));
    }
    int top_dimension() const {
        int d = -1;
        for (const auto& c : cells) d = std::max(d, c.dim);
        return d;
    }
};

struct ComplexLimits {
    std::size_t max_cells = 20'000'000;
};

/// Flood fill from the representative's top cell across interior faces, then
/// close under faces and look for collapsed strands.
inline BraidClassComponent enumerate_component(const DiscreteRelativeBraid& rb, const ComplexLimits& limits = {}) {
    auto geom = std::make_shared<const ClassGeometry>(rb);
    BraidClassComponent comp;
    comp.geometry = geom;

    std::unordered_map<CellKey, std::uint32_t> index;
    auto add = [&](const CellKey& key) -> std::pair<std::uint32_t, bool> {
        auto [it, fresh] = index.try_emplace(key, static_cast<std::uint32_t>(comp.closure.size()));
        if (fresh) {
            if (comp.closure.size() >= limits.max_cells) throw std::length_error("cell complex exceeds the configured size limit");
            comp.closure.push_back(ComplexCell{key, geom->dimension(key), false, {}});
        }
        return {it->second, fresh};
    };

    const CellKey start = geom->cell_of_braid();
    comp.crossing_number = geom->crossing_number(start);
    std::deque<CellKey> queue{start};
    add(start);
    std::unordered_set<CellKey> exit_set;
    while (!queue.empty()) {
        const CellKey cell = std::move(queue.front());
        queue.pop_front();
        comp.top_cells.push_back(index.at(cell));
        if (geom->crossing_number(cell) != comp.crossing_number) comp.crossing_constant = false;
        for (auto& tf : geom->top_faces(cell)) {
            if (tf.interior) {
                if (auto [id, fresh] = add(tf.across); fresh) queue.push_back(tf.across);
                continue;
            }
            if (tf.lower_obj.kind != StrandRef::Kind::Lower && tf.upper_obj.kind != StrandRef::Kind::Upper &&
                !tf.across.empty()) {
                ++comp.tangency_faces;
                const auto jump = geom->crossing_number(tf.across) - comp.crossing_number;
                if (jump != (tf.exit ? -2 : 2)) ++comp.tangency_jump_violations;
            }
            if (tf.exit) exit_set.insert(tf.face);
        }
    }
    comp.exit_faces.assign(exit_set.begin(), exit_set.end());
    std::sort(comp.exit_faces.begin(), comp.exit_faces.end());

    // closure: breadth first through faces; faces lists are filled on the way
    std::deque<std::uint32_t> pending(comp.top_cells.begin(), comp.top_cells.end());
    while (!pending.empty()) {
        const std::uint32_t id = pending.front();
        pending.pop_front();
        std::vector<std::uint32_t> fs;
        for (auto& f : geom->faces(comp.closure[id].key)) {
            auto [fid, fresh] = add(f);
            fs.push_back(fid);
            if (fresh) pending.push_back(fid);
        }
        comp.closure[id].faces = std::move(fs);
    }

    for (const auto& cell : comp.closure) {
        if (auto w = geom->find_collapse(cell.key)) {
            comp.proper = false;
            comp.witness = std::move(w);
            break;
        }
    }
    return comp;
}

/// N is the closure of the component, N^- the closure of its exit faces.
inline IndexPair index_pair(const BraidClassComponent& comp) {
    if (!comp.proper) {
        const std::string w = comp.witness ? comp.witness->describe() : std::string("collapse");
        throw ImproperClassError("braid class is not proper: " + w, w);
    }
    IndexPair ip;
    ip.geometry = comp.geometry;
    ip.cells = comp.closure;
    ip.crossing_number = comp.crossing_number;
    std::unordered_map<CellKey, std::uint32_t> index;
    for (std::uint32_t i = 0; i < ip.cells.size(); ++i) index.emplace(ip.cells[i].key, i);
    std::deque<std::uint32_t> pending;
    for (const auto& key : comp.exit_faces) {
        const auto id = index.at(key);
        if (!ip.cells[id].exit) {
            ip.cells[id].exit = true;
            pending.push_back(id);
        }
    }
    while (!pending.empty()) {
        const auto id = pending.front();
        pending.pop_front();
        for (auto f : ip.cells[id].faces)
            if (!ip.cells[f].exit) {
                ip.cells[f].exit = true;
                pending.push_back(f);
            }
    }
    return ip;
}

/// True when every face of an exit cell is an exit cell.
inline bool exit_set_closed(const IndexPair& ip) {
    for (const auto& c : ip.cells)
        if (c.exit)
            for (auto f : c.faces)
                if (!ip.cells[f].exit) return false;
    return true;
}

struct PropernessResult {
    bool proper = true;
    std::optional<Collapse> witness;
};

inline PropernessResult properness_check(const DiscreteRelativeBraid& rb) {
    if (rb.free.strands() == 0) return {};
    auto comp = enumerate_component(rb);
    return PropernessResult{comp.proper, comp.witness};
}

}  // namespace braidfloer
