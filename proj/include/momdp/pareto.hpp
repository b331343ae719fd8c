#pragma once

#include "momdp/encodings.hpp"

namespace momdp {

// All Pareto bookkeeping happens in "maximizing orientation": coordinate j is
// +value for maximizing and -value for minimizing objectives, so domination
// is plain componentwise >= and every direction vector is non-negative.
using Vec = std::vector<Rat>;

struct Halfspace {
    Vec normal;
    Rat offset;  // normal . x <= offset
};

// Candidate region: for two objectives an exact convex polygon (counter-
// clockwise vertex list); in general a halfspace intersection inside the box.
struct Region {
    std::vector<Vec> vertices;       // 2-d representation
    std::vector<Halfspace> bounds;   // general representation
    Vec anchor_a, anchor_b;          // open facet endpoints (2-d directions)
    long long id = 0;

    bool two_d() const { return !vertices.empty() || bounds.empty(); }
};

// Exact 2-d polygon helpers.
std::vector<Vec> clip_polygon(const std::vector<Vec>& polygon, const Halfspace& h);
Rat polygon_area_twice(const std::vector<Vec>& polygon);

struct ParetoFoundPoint {
    Point point;  // original orientation, exact
    PureStationaryStrategy strategy;
};

struct ParetoApprox {
    std::vector<ParetoFoundPoint> found;          // pairwise non-dominated
    std::vector<std::vector<Vec>> unachievable;   // certified polygons (oriented space)
    std::vector<Region> candidates;               // residual work (time limit)
    Vec eps;                                      // absolute, oriented space scale
    std::vector<std::pair<Rat, Rat>> box;         // oriented-space bounds per objective
    bool complete = true;
    long long milp_solves = 0;

    // Oriented-space coordinates of a found point.
    Vec oriented(const Query& q, int index) const;
};

struct ParetoOptions {
    PsmaOptions::Flavor flavor = PsmaOptions::Flavor::Auto;
    SolverOptions solver;
    double time_limit_seconds = 0;
    long long max_iterations = 0;  // 0: derived from the eps grid
};

// Direction orthogonal to the region's open facet, non-negative, |w|_1 = 1.
Vec choose_direction(const Region& region);

struct RegionOptimum {
    bool feasible = false;
    Point point;  // exact value vector of the extracted strategy (original orientation)
    PureStationaryStrategy strategy;
    Rat cut;  // certified bound: no achievable x in region with w.x > cut
};

// Optimizing achievability query restricted to the region.
RegionOptimum optimize_in_region(const Mdp& m, const Query& q, const Region& region,
                                 const Vec& w, const ParetoOptions& opts = {});

struct RegionSplit {
    std::vector<Vec> achievable_part;  // region cap closure of the point
    Halfspace unachievable;            // w . x > cut within the region
    std::vector<Region> candidates;
};

// Divides a 2-d region after finding oriented point t with direction w.
RegionSplit split_region(const Region& region, const Vec& t, const Vec& w, const Rat& cut,
                         const Vec& eps, long long* next_id);

// Per-objective achievable value range (two optimizing solves each).
std::vector<std::pair<Rat, Rat>> compute_objective_ranges(const Mdp& m, const Query& q,
                                                          const ParetoOptions& opts = {});

// eps-approximation of the pure stationary Pareto front by iterative region
// refinement; eps is absolute and per-objective.
ParetoApprox approximate_pareto(const Mdp& m, const Query& q, const Vec& eps,
                                const ParetoOptions& opts = {});

// Relative variant: eps_j = eps * (max_j - min_j), matching the tool default.
ParetoApprox approximate_pareto_relative(const Mdp& m, const Query& q, double eps,
                                         const ParetoOptions& opts = {});

}  // namespace momdp
