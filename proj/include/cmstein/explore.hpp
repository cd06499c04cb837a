#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "cmstein/config.hpp"
#include "cmstein/error.hpp"
#include "cmstein/union_find.hpp"

namespace cmstein {

/// One revealed pair of the truncated component, with its ball witness.
struct ExploredEdge {
    Colour a;
    Colour b;
    Ball ball_a;
    Ball ball_b;

    bool is_loop() const { return a == b; }
    friend bool operator==(const ExploredEdge&, const ExploredEdge&) = default;
};

/// Truncated component of a root: the sub-configuration on the explored colours.
struct TruncatedComponent {
    Colour root = 0;
    std::vector<Colour> colours;          // exploration order, root first
    std::vector<Degree> colour_degrees;   // parallel to colours
    std::vector<ExploredEdge> edges;
    std::size_t unpaired_count = 0;
    bool truncated = false;

    std::size_t size() const { return colours.size(); }
    Degree root_degree() const { return colour_degrees.front(); }

    friend bool operator==(const TruncatedComponent&, const TruncatedComponent&) = default;
};

/// Truncated breadth-first exploration with reusable scratch space. The unpaired ball whose
/// partner is revealed next is the minimum of (BFS wave of its colour,
/// colour label, ball label).
///
/// Bound to one configuration at a time; rebind() switches to another
/// configuration over the same number of colours without reallocating.
class Explorer {
public:
    explicit Explorer(const Configuration& g) : g_(&g), stamp_(g.num_colours(), 0) {}

    void rebind(const Configuration& g) {
        if (g.num_colours() != stamp_.size()) {
            stamp_.assign(g.num_colours(), 0);
            generation_ = 0;
        }
        g_ = &g;
    }

    const Configuration& configuration() const { return *g_; }

    TruncatedComponent explore(Colour v, std::size_t ell) {
        TruncatedComponent t;
        explore_into(v, ell, t);
        return t;
    }

    void explore_into(Colour v, std::size_t ell, TruncatedComponent& out) {
        const Configuration& g = *g_;
        if (v >= g.num_colours())
            throw Error(ErrorCode::InvalidVertex, "vertex " + std::to_string(v + 1) + " out of range");
        if (ell < 1) throw Error(ErrorCode::InvalidArgument, "ell must be >= 1");
        next_generation();

        out.root = v;
        out.colours.clear();
        out.colour_degrees.clear();
        out.edges.clear();
        heap_.clear();

        add_colour(v, 0, out);
        while (out.colours.size() < ell) {
            bool found = false;
            while (!heap_.empty()) {
                std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
                const Candidate cand = heap_.back();
                heap_.pop_back();
                const Colour w = g.colour_of(g.partner(std::get<2>(cand)));
                if (in_set(w)) continue; // paired when a later colour was added
                add_colour(w, std::get<0>(cand) + 1, out);
                found = true;
                break;
            }
            if (!found) break;
        }

        out.unpaired_count = 0;
        for (Colour c : out.colours) {
            for (Ball b = g.first_ball(c); b < g.end_ball(c); ++b) {
                const Ball p = g.partner(b);
                const Colour pc = g.colour_of(p);
                if (!in_set(pc))
                    ++out.unpaired_count;
                else if (b < p)
                    out.edges.push_back({c, pc, b, p});
            }
        }
        out.truncated = out.unpaired_count > 0;
    }

    /// Membership in the colour set of the most recent exploration.
    bool in_last(Colour c) const { return in_set(c); }

private:
    using Candidate = std::tuple<std::uint32_t, Colour, Ball>; // (wave, colour, ball)

    void next_generation() {
        if (++generation_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            generation_ = 1;
        }
    }

    bool in_set(Colour c) const { return stamp_[c] == generation_; }

    void add_colour(Colour c, std::uint32_t wave, TruncatedComponent& out) {
        const Configuration& g = *g_;
        stamp_[c] = generation_;
        out.colours.push_back(c);
        out.colour_degrees.push_back(g.degree(c));
        for (Ball b = g.first_ball(c); b < g.end_ball(c); ++b) {
            if (in_set(g.colour_of(g.partner(b)))) continue;
            heap_.emplace_back(wave, c, b);
            std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
        }
    }

    const Configuration* g_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t generation_ = 0;
    std::vector<Candidate> heap_;
};

inline TruncatedComponent explore_truncated(const Configuration& g, Colour v, std::size_t ell) {
    Explorer e(g);
    return e.explore(v, ell);
}

/// Connected components of the multigraph; R = largest size.
struct ComponentPartition {
    std::vector<std::uint32_t> component_id;  // per colour, ids in order of smallest member
    std::vector<std::size_t> sizes;
    std::size_t largest = 0;

    std::size_t outside_largest() const { return component_id.size() - largest; }
};

inline ComponentPartition components(const Configuration& g) {
    const std::size_t n = g.num_colours();
    UnionFind uf(n);
    for (Ball b = 0; b < g.num_balls(); ++b) {
        const Ball p = g.partner(b);
        if (b < p) {
            const Colour a = g.colour_of(b), c = g.colour_of(p);
            if (a != c) uf.unite(a, c);
        }
    }
    ComponentPartition out;
    out.component_id.assign(n, 0);
    std::vector<std::uint32_t> id_of_root(n, UINT32_MAX);
    for (Colour c = 0; c < n; ++c) {
        const std::uint32_t r = uf.find(c);
        if (id_of_root[r] == UINT32_MAX) {
            id_of_root[r] = static_cast<std::uint32_t>(out.sizes.size());
            out.sizes.push_back(0);
        }
        out.component_id[c] = id_of_root[r];
        ++out.sizes[id_of_root[r]];
    }
    out.largest = *std::max_element(out.sizes.begin(), out.sizes.end());
    return out;
}

} // namespace cmstein
