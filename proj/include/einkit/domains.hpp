#pragma once

#include "einkit/einstein.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace einkit::domains {

using ein::AffineChart;
using ein::EinPoint;
using ein::Photon;
using forms::FormSpace;
using forms::FormSpacePtr;
using forms::Mat;
using forms::Signature;
using forms::Vec;

/// Intersection of a projective line with a domain, in the affine parameter
/// of s -> P(u + s w). Endpoints may be +-infinity; when wraps_infinity is
/// set, the unbounded tails belong to one component through P(w).
struct LineHit {
    std::vector<std::pair<double, double>> intervals;
    bool contains_infinity = false;

    /// The component containing parameter s (interval endpoints may be
    /// infinite); nullopt if s is not inside any interval.
    std::optional<std::pair<double, double>> component_containing(double s) const;
};

/// Splitting model of a diamond: an orthogonal decomposition
/// V0 (signature (1,q)) + V1 (signature (p,1)) of the ambient (p+1,q+1) space
/// together with sheet selectors e0 in V0 (q = -1) and e1 in V1 (q = +1).
/// Members are P(w0 + w1) with q(w1) > 0 and b(w0,e0) b(w1,e1) > 0.
class DiamondSpec {
public:
    DiamondSpec(FormSpacePtr space, Mat v0_basis, Mat v1_basis, Vec e0, Vec e1);

    /// The canonical splitting of an orthonormal-layout space: V1 spanned by
    /// the minus vectors 1..p and the first plus vector, V0 by the rest.
    static DiamondSpec canonical(const FormSpacePtr& space);

    /// Build a spec from a splitting, with sheet selectors chosen so that
    /// the given interior point is a member.
    static DiamondSpec from_splitting(const FormSpacePtr& space, const Mat& v0_basis,
                                      const Mat& v1_basis, const EinPoint& interior);

    const FormSpace& space() const { return *space_; }
    const FormSpacePtr& space_ptr() const { return space_; }
    const Mat& v0_basis() const { return V0_; }
    const Mat& v1_basis() const { return V1_; }
    const Vec& e0() const { return e0_; }
    const Vec& e1() const { return e1_; }

    /// (p,q) of the Einstein universe this diamond lives in.
    Signature ein_signature() const;

    /// Orthogonal decomposition v = w0 + w1.
    std::pair<Vec, Vec> decompose(const Vec& v) const;

    bool member(const EinPoint& x) const;
    /// Sign-stable membership margin: min of the two defining inequalities
    /// on the unit lift (positive inside, negative outside).
    double member_margin(const EinPoint& x) const;

    /// Factor components scaled to the quadric sheets, with the V0 component
    /// aligned to the sheet of e0. Throws on non-members.
    std::pair<Vec, Vec> sheet_components(const EinPoint& x) const;

    /// The dual diamond (the other proper component of the splitting).
    DiamondSpec dual() const;

    /// Basepoint P(e1 - e0).
    EinPoint basepoint() const;

    /// Random point of F0 = Ein cap P(V0) (resp. F1).
    EinPoint sample_F0(Rng& rng) const;
    EinPoint sample_F1(Rng& rng) const;
    /// Random member, sampled in the product model with factor arc lengths
    /// up to `radius` from the basepoint sheets.
    EinPoint sample_member(Rng& rng, double radius = 2.0) const;

    /// Supporting lightcone vertices at a boundary point: the isotropic
    /// factor components for joint points, the point itself for F corners.
    std::vector<EinPoint> supporting_vertices(const EinPoint& boundary_pt) const;

    /// Exact intersection of the projective line P(u + s w) with the diamond.
    LineHit line_hit(const Vec& u, const Vec& w) const;

    /// Conjugated spec g . D for a form-preserving g.
    DiamondSpec transformed(const Mat& g) const;

private:
    FormSpacePtr space_;
    Mat V0_, V1_;
    Vec e0_, e1_;
    Mat proj0_;  // b-orthogonal projector onto V0
};

/// Chart-model norm ball: D = { m : ||m - c||_{p,q} < r } with
/// ||x||_{p,q} = sqrt(-q(x_p)) + sqrt(q(x_q)).
struct NormBallSpec {
    std::shared_ptr<const AffineChart> chart;
    Mat hp_basis;  // negative definite factor, columns in chart coordinates
    Mat hq_basis;  // positive definite factor
    Vec center;
    double radius = 1.0;

    NormBallSpec(std::shared_ptr<const AffineChart> chart_in, Mat hp, Mat hq, Vec c, double r);

    double norm(const Vec& m) const;  // ||m||_{p,q}
    bool member(const Vec& m) const { return norm(m - center) < radius; }
};

bool diamond_member(const DiamondSpec& spec, const EinPoint& x);
bool norm_ball_member(const NormBallSpec& spec, const Vec& m);

/// The norm-ball model of a diamond: the chart in which the diamond is the
/// unit ball centered at the origin.
NormBallSpec norm_ball_of_diamond(const DiamondSpec& spec);

/// Membership oracle for a domain of Ein^{p,q}.
struct DomainOracle {
    DomainOracle(FormSpacePtr space_in, std::string family_in,
                 std::function<bool(const EinPoint&)> member_in, EinPoint basepoint_in)
        : space(std::move(space_in)), family(std::move(family_in)),
          member(std::move(member_in)), basepoint(std::move(basepoint_in)) {}

    FormSpacePtr space;
    std::string family = "custom";
    std::function<bool(const EinPoint&)> member;
    EinPoint basepoint;
    /// Optional exact line solver; when absent callers fall back to the
    /// generic angular scan.
    std::function<LineHit(const Vec& u, const Vec& w)> line_solver;
    /// Optional family knowledge for bound seeding / structured K samples.
    std::shared_ptr<const DiamondSpec> diamond;
    /// Optional chain waypoints for the upper-bound search.
    std::function<std::vector<EinPoint>(const EinPoint&, const EinPoint&)> waypoint_hint;
};

DomainOracle oracle_from_diamond(const DiamondSpec& spec);
DomainOracle oracle_from_norm_ball(const NormBallSpec& spec, const FormSpacePtr& space);
/// The whole Einstein universe (trivial, non-proper).
DomainOracle oracle_full(const FormSpacePtr& space);
/// An affine chart Ein minus C(xi0) (non-proper instrument).
DomainOracle oracle_affine_chart(const std::shared_ptr<const AffineChart>& chart);

/// Generic angular-scan line solver (grid + bisection refinement).
LineHit scan_line(const DomainOracle& dom, const Vec& u, const Vec& w, int grid = 1024);

/// Line intersection using the oracle's exact solver when available.
LineHit solve_line(const DomainOracle& dom, const Vec& u, const Vec& w);

/// Boundary point on the projective arc from the basepoint towards target
/// (target must be outside the domain); bisection to parameter tol 1e-12.
EinPoint boundary_toward(const DomainOracle& dom, const EinPoint& target);

/// Mixed rejection / ray sampling of member points.
std::vector<EinPoint> member_cloud(const DomainOracle& dom, int count, Rng& rng);

struct WitnessOptions {
    int candidates = 2000;
    int cloud = 400;
    double gap = 1e-6;
};

/// A point xi whose lightcone misses all membership samples (margin >= gap).
std::optional<EinPoint> properness_witness(const DomainOracle& dom, Rng& rng,
                                           const WitnessOptions& opt = {});

struct KSampleOptions {
    int target = 200;
    int candidates = 4000;
    int cloud = 400;
    double gap = 1e-7;
};

/// Sampled points of K(Omega) = { xi : C(xi) cap Omega = empty } (sign of
/// b(xi,.) constant over the member cloud, margin >= gap). Diamond-family
/// oracles are enriched with dual-diamond and F-sphere samples.
std::vector<EinPoint> sample_K(const DomainOracle& dom, Rng& rng,
                               const KSampleOptions& opt = {});

struct DualConvexityOptions {
    int photons = 64;        // photons through the boundary point
    int angles = 48;         // candidate vertices per photon
    int cloud = 600;         // member samples used to test C(b) cap Omega
    double margin = 1e-7;
};

/// Search for a supporting lightcone vertex b at a boundary point
/// (a in C(b), C(b) cap Omega sample-empty). Diamond oracles use the exact
/// factor construction first.
std::optional<EinPoint> dual_convexity_check(const DomainOracle& dom, const EinPoint& boundary_pt,
                                             Rng& rng, const DualConvexityOptions& opt = {});

struct HullOptions {
    int cloud = 1200;
    int directions = 160;
    int refine_steps = 12;
    double dedupe_angle = 1e-4;
};

/// Exposed-point scan of the projective convex hull O_Omega: maximizers of
/// random linear functionals over the lifted section, refined along the
/// boundary. Requires p >= 1 and a properness witness.
std::vector<EinPoint> projective_hull(const DomainOracle& dom, Rng& rng,
                                      const HullOptions& opt = {});

struct ExtremalityOptions {
    int photons = 256;   // deterministic low-discrepancy fan
    double step = 1e-4;  // probe offset along each photon
    double boundary_tol = 1e-6;
};

/// Purify a boundary point to a photon-extremal one: while some photon
/// through the point has the point interior to photon cap closure(Omega),
/// move to an endpoint of that boundary segment. Endpoint selection prefers
/// larger values of the optional objective functional on lifts.
EinPoint slide_to_extremal(const DomainOracle& dom, EinPoint a,
                           const Vec* objective = nullptr, int fan = 256, int max_rounds = 12);

/// True iff the boundary point is an endpoint of photon cap closure(Omega)
/// along every sampled photon through it.
bool extremality_check(const DomainOracle& dom, const EinPoint& a,
                       const ExtremalityOptions& opt = {});

enum class ExtremalClass { Timelike, Spacelike };

/// Classification of a photon-extremal boundary point by the sign of
/// b(lift a, lift x) over member samples under chart-normalized lifts.
/// Throws if the signs are mixed (C(a) meets Omega: non-certifiable domain).
ExtremalClass classify_extremal(const DomainOracle& dom, const EinPoint& a,
                                const EinPoint& witness, const std::vector<EinPoint>& cloud);

/// Prop-3.3-style component table for the splitting V0 + V1 with the given
/// restricted signatures.
struct ComponentTable {
    int components = 0;
    int proper = 0;
    bool dense = false;
    bool lorentzian_diamonds = false;
    std::string description;
};

ComponentTable classify_splitting_components(Signature sig0, Signature sig1);

}  // namespace einkit::domains
