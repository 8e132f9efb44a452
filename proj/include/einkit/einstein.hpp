#pragma once

#include "einkit/forms.hpp"
#include "einkit/rng.hpp"

#include <optional>

namespace einkit::ein {

using forms::FormSpace;
using forms::FormSpacePtr;
using forms::Mat;
using forms::Signature;
using forms::Vec;

/// A point of the projectivized null cone of a form space of signature
/// (p+1,q+1). The stored lift is canonically normalized: unit Euclidean norm,
/// first coordinate larger than 1e-7 in absolute value made positive. With
/// that convention serialized fixtures are comparable after rounding to 12
/// significant digits.
class EinPoint {
public:
    EinPoint(FormSpacePtr space, Vec lift);

    const Vec& lift() const { return lift_; }
    const FormSpace& space() const { return *space_; }
    const FormSpacePtr& space_ptr() const { return space_; }

    /// Scale-free projective equality: | 1 - |<u,v>_Euclid| | < tol on unit lifts.
    bool same_point(const EinPoint& other) const;

private:
    FormSpacePtr space_;
    Vec lift_;
};

/// Canonical sign/scale normalization of a homogeneous lift.
Vec canonical_lift(Vec v);

/// Projection of an arbitrary nonzero vector onto the null cone (rescales the
/// negative and positive eigenspace components to equal norm). Used by
/// samplers; fails on vectors (numerically) inside one definite eigenspace.
EinPoint project_to_cone(const FormSpacePtr& space, const Vec& v);

/// Uniform-ish random point of Ein^{p,q} (independent unit vectors in the two
/// definite eigenspaces of the gram).
EinPoint random_point(const FormSpacePtr& space, Rng& rng);

/// A photon: the projectivization of a totally isotropic 2-plane.
class Photon {
public:
    Photon(FormSpacePtr space, Vec a, Vec b);

    const FormSpace& space() const { return *space_; }
    const FormSpacePtr& space_ptr() const { return space_; }
    /// Orthonormalized (Euclidean) spanning pair.
    const Vec& span_a() const { return a_; }
    const Vec& span_b() const { return b_; }

    /// The point P(cos(theta) a + sin(theta) b); theta in [0, pi) covers the photon.
    EinPoint at_angle(double theta) const;

    bool contains(const EinPoint& x) const;

private:
    FormSpacePtr space_;
    Vec a_, b_;
};

/// True iff y lies on the lightcone C(x), i.e. b(lift x, lift y) = 0 within
/// tol. x == y returns true by convention (a point is on its own lightcone).
bool on_common_photon(const EinPoint& x, const EinPoint& y);

/// The photon through two distinct incident points. Throws on non-incident or
/// equal input.
Photon photon_through(const EinPoint& x, const EinPoint& y);

/// Stereographic chart: Ein minus C(xi0) identified with R^{p,q} via
/// m |-> P(xi_inf + m - (q(m)/2) xi0). comp_basis columns are b-orthonormal,
/// orthogonal to xi0 and xi_inf, minus vectors first.
class AffineChart {
public:
    AffineChart(EinPoint xi0, EinPoint xi_inf, Mat comp_basis);

    /// Chart at the standard lightcone of an orthonormal-basis space.
    static AffineChart standard(const FormSpacePtr& space);

    const EinPoint& xi0() const { return xi0_; }
    const EinPoint& xi_inf() const { return xi_inf_; }
    const Mat& comp_basis() const { return comp_basis_; }
    const FormSpace& space() const { return xi0_.space(); }
    const FormSpacePtr& space_ptr() const { return xi0_.space_ptr(); }

    /// Signature (p,q) of the chart copy of Minkowski space.
    Signature chart_signature() const { return sig_; }

    /// q_{p,q}(m) of a chart vector.
    double chart_q(const Vec& m) const;
    double chart_b(const Vec& m1, const Vec& m2) const;

    /// The ambient vector xi_inf + m - (q(m)/2) xi0 (not normalized).
    Vec embed_lift(const Vec& m) const;

private:
    EinPoint xi0_, xi_inf_;
    Mat comp_basis_;
    Vec xi0_lift_, xi_inf_lift_;  // the pairing-normalized lifts actually used
    Signature sig_;
    Vec metric_signs_;  // q(c_i) of the orthonormalized comp basis columns

    friend EinPoint chart_embed(const AffineChart&, const Vec&);
    friend Vec chart_project(const AffineChart&, const EinPoint&);
    friend std::optional<Vec> try_chart_project(const AffineChart&, const EinPoint&);
};

/// m |-> P(xi_inf + m - (q(m)/2) xi0); satisfies
/// b(embed(m), embed(m')) = -q(m - m')/2 on pairing-normalized lifts.
EinPoint chart_embed(const AffineChart& chart, const Vec& m);

/// Inverse of chart_embed; throws if x is on C(xi0) (point at infinity).
Vec chart_project(const AffineChart& chart, const EinPoint& x);
std::optional<Vec> try_chart_project(const AffineChart& chart, const EinPoint& x);

/// |[xi1 : x : y : xi2]| = |<v1,u><v2,v> / (<v2,u><v1,v>)| with <,> the ambient
/// form; lift-scale invariant. Throws if an incidence makes it undefined.
double cross_ratio_modulus(const EinPoint& xi1, const EinPoint& x, const EinPoint& y,
                           const EinPoint& xi2);

/// Projective parametrization s |-> P(anchor + s dir) of the photon through
/// anchor and dir, covering the photon minus P(dir).
class PhotonParam {
public:
    PhotonParam(EinPoint anchor, EinPoint dir);

    EinPoint at(double s) const;
    /// Limit point s -> infinity.
    const EinPoint& at_infinity() const { return dir_; }

    /// Parameter of a point on the photon; nullopt for P(dir) itself.
    std::optional<double> parameter_of(const EinPoint& x) const;

private:
    EinPoint anchor_, dir_;
};

/// Euclidean-orthonormal basis of the b-orthogonal complement x^perp
/// (dim-1 columns; the span contains the lift of x itself).
Mat perp_basis(const EinPoint& x);

/// A null direction w in x^perp, independent of lift(x), so that {lift(x), w}
/// spans a totally isotropic 2-plane. The seed vector (dim-1 entries, at least
/// one nonzero in each definite block of the quotient) selects the direction;
/// throws when p = 0 or q = 0 (no photons).
Vec null_direction_in_perp(const EinPoint& x, const Vec& seed);

/// Random photon through x.
Photon random_photon_through(const EinPoint& x, Rng& rng);

/// Deterministic Halton-driven photon through x (index-th member of a
/// low-discrepancy fan).
Photon halton_photon_through(const EinPoint& x, std::uint64_t index);

/// Random point on the lightcone C(x), distinct from x.
EinPoint random_incident_point(const EinPoint& x, Rng& rng);

/// Apply a linear map to a point (the map must send the null cone to itself;
/// checked loosely through the EinPoint constructor).
EinPoint apply(const Mat& g, const EinPoint& x);

/// Angle-metric between projective points: arccos(|<u,v>|) on unit lifts.
/// Chart-free diameter proxy used by the dynamics module.
double projective_angle(const EinPoint& x, const EinPoint& y);

}  // namespace einkit::ein
