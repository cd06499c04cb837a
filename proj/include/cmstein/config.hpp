#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmstein/degseq.hpp"
#include "cmstein/error.hpp"
#include "cmstein/rng.hpp"

namespace cmstein {

using Ball = std::uint32_t;
using Colour = std::uint32_t;

/// Ball/colour scheme of a degree sequence: balls first_ball[c] ..
/// first_ball[c+1]-1 carry colour c. Shared between configurations on the
/// same degrees.
class BallLayout {
public:
    explicit BallLayout(DegreeSequence d) : degrees_(std::move(d)) {
        const std::size_t n = degrees_.size();
        first_ball_.resize(n + 1);
        colour_of_.resize(degrees_.total());
        Ball b = 0;
        for (Colour c = 0; c < n; ++c) {
            first_ball_[c] = b;
            for (Degree k = 0; k < degrees_[c]; ++k) colour_of_[b++] = c;
        }
        first_ball_[n] = b;
    }

    const DegreeSequence& degrees() const { return degrees_; }
    std::size_t num_colours() const { return degrees_.size(); }
    std::size_t num_balls() const { return colour_of_.size(); }
    Colour colour_of(Ball b) const { return colour_of_[b]; }
    Ball first_ball(Colour c) const { return first_ball_[c]; }
    Ball end_ball(Colour c) const { return first_ball_[c + 1]; }
    Degree degree(Colour c) const { return degrees_[c]; }

private:
    DegreeSequence degrees_;
    std::vector<Ball> first_ball_;
    std::vector<Colour> colour_of_;
};

/// A perfect matching of the balls, stored as a partner array. Labels are
/// 0-based; serialisation converts to 1-based.
class Configuration {
public:
    /// Validates that partner is a fixed-point-free involution.
    Configuration(std::shared_ptr<const BallLayout> layout, std::vector<Ball> partner)
        : layout_(std::move(layout)), partner_(std::move(partner)) {
        const std::size_t m = layout_->num_balls();
        if (partner_.size() != m)
            throw Error(ErrorCode::InvalidConfiguration,
                        "partner array has " + std::to_string(partner_.size()) + " entries, expected " +
                            std::to_string(m));
        for (Ball b = 0; b < m; ++b) {
            const Ball p = partner_[b];
            if (p >= m || p == b || partner_[p] != b)
                throw Error(ErrorCode::InvalidConfiguration,
                            "ball " + std::to_string(b + 1) + " violates the matching involution");
        }
    }

    Configuration(const DegreeSequence& d, std::vector<Ball> partner)
        : Configuration(std::make_shared<const BallLayout>(d), std::move(partner)) {}

    /// From unordered ball pairs (0-based).
    static Configuration from_pairs(const DegreeSequence& d, std::span<const std::pair<Ball, Ball>> pairs) {
        const std::size_t m = d.total();
        std::vector<Ball> partner(m, static_cast<Ball>(m));
        for (auto [a, b] : pairs) {
            if (a >= m || b >= m || partner[a] != m || partner[b] != m || a == b)
                throw Error(ErrorCode::InvalidConfiguration, "pairs do not form a perfect matching");
            partner[a] = b;
            partner[b] = a;
        }
        return Configuration(d, std::move(partner));
    }

    const BallLayout& layout() const { return *layout_; }
    const std::shared_ptr<const BallLayout>& shared_layout() const { return layout_; }
    const DegreeSequence& degrees() const { return layout_->degrees(); }
    std::size_t num_colours() const { return layout_->num_colours(); }
    std::size_t num_balls() const { return partner_.size(); }

    Ball partner(Ball b) const { return partner_[b]; }
    Colour colour_of(Ball b) const { return layout_->colour_of(b); }
    Ball first_ball(Colour c) const { return layout_->first_ball(c); }
    Ball end_ball(Colour c) const { return layout_->end_ball(c); }
    Degree degree(Colour c) const { return layout_->degree(c); }
    std::span<const Ball> partners() const { return partner_; }

    /// Pairs (a, b) with a < b, ordered by a.
    std::vector<std::pair<Ball, Ball>> pairs() const {
        std::vector<std::pair<Ball, Ball>> out;
        out.reserve(partner_.size() / 2);
        for (Ball b = 0; b < partner_.size(); ++b)
            if (b < partner_[b]) out.emplace_back(b, partner_[b]);
        return out;
    }

    friend bool operator==(const Configuration& a, const Configuration& b) {
        return a.partner_ == b.partner_ && a.degrees() == b.degrees();
    }

private:
    std::shared_ptr<const BallLayout> layout_;
    std::vector<Ball> partner_;
};

/// Uniform over all (m-1)!! matchings: backward Fisher-Yates shuffle of
/// the ball labels, then consecutive entries are paired.
inline Configuration sample_configuration(std::shared_ptr<const BallLayout> layout, RandomStream& rng) {
    const std::size_t m = layout->num_balls();
    std::vector<Ball> perm(m);
    std::iota(perm.begin(), perm.end(), Ball{0});
    for (std::size_t i = m; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    std::vector<Ball> partner(m);
    for (std::size_t i = 0; i + 1 < m; i += 2) {
        partner[perm[i]] = perm[i + 1];
        partner[perm[i + 1]] = perm[i];
    }
    return Configuration(std::move(layout), std::move(partner));
}

inline Configuration sample_configuration(const DegreeSequence& d, RandomStream& rng) {
    return sample_configuration(std::make_shared<const BallLayout>(d), rng);
}

inline Configuration sample_configuration(const DegreeSequence& d, Seed seed) {
    RandomStream rng(seed, {tag(StreamTag::Configuration)});
    return sample_configuration(d, rng);
}

/// G|_C: pairs with both colours in C, plus the boundary balls of C.
struct SubConfiguration {
    std::vector<Colour> colours;                     // sorted
    std::vector<std::pair<Ball, Ball>> internal_pairs; // a < b, sorted
    std::vector<Ball> unpaired;                      // sorted

    std::size_t boundary_size() const { return unpaired.size(); }
    friend bool operator==(const SubConfiguration&, const SubConfiguration&) = default;
};

inline SubConfiguration restrict(const Configuration& g, std::span<const Colour> colours) {
    const std::size_t n = g.num_colours();
    std::vector<char> in(n, 0);
    SubConfiguration sub;
    for (Colour c : colours) {
        if (c >= n) throw Error(ErrorCode::InvalidVertex, "colour " + std::to_string(c + 1) + " out of range");
        if (!in[c]) sub.colours.push_back(c);
        in[c] = 1;
    }
    std::sort(sub.colours.begin(), sub.colours.end());
    for (Colour c : sub.colours) {
        for (Ball b = g.first_ball(c); b < g.end_ball(c); ++b) {
            const Ball p = g.partner(b);
            if (!in[g.colour_of(p)])
                sub.unpaired.push_back(b);
            else if (b < p)
                sub.internal_pairs.emplace_back(b, p);
        }
    }
    std::sort(sub.internal_pairs.begin(), sub.internal_pairs.end());
    return sub;
}

} // namespace cmstein
