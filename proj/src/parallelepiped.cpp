#include "measinf/parallelepiped.hpp"

#include <cmath>
#include <limits>

#include "measinf/rounding.hpp"

namespace measinf {

namespace {

constexpr std::size_t kOpaqueSpotCheck = 64;

Tri both(Tri x, Tri y) {
    if (x == Tri::No || y == Tri::No) return Tri::No;
    if (x == Tri::Unknown || y == Tri::Unknown) return Tri::Unknown;
    return Tri::Yes;
}

Tri nonnegative_difference(const TailedSequence& big, const TailedSequence& small) {
    try {
        return all_nonnegative(big - small);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::RepresentationOverflow) return Tri::Unknown;
        throw;
    }
}

// a + b rounded up only when the addition is inexact.
double add_up(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return err > 0.0 ? rounding::up(s) : s;
}

} // namespace

Parallelepiped::Parallelepiped(TailedSequence lower, TailedSequence upper)
    : lower_(std::move(lower)), upper_(std::move(upper)), lengths_(upper_ - lower_) {
    const SignProfile s = sign_profile(lengths_);
    if (s.first_negative != 0)
        throw Error(ErrorCode::InvalidArgument,
                    "lower endpoint exceeds upper endpoint at coordinate " + std::to_string(s.first_negative),
                    s.first_negative);
    if (s.kind == SignProfile::Kind::Unknown) {
        if (!lengths_.is_opaque())
            throw Error(ErrorCode::InvalidArgument, "cannot certify lower <= upper for this tail");
        const std::size_t from = lengths_.prefix().size();
        for (std::size_t i = from + 1; i <= from + kOpaqueSpotCheck; ++i)
            if (lengths_(i) < 0.0)
                throw Error(ErrorCode::InvalidArgument,
                            "lower endpoint exceeds upper endpoint at coordinate " + std::to_string(i), i);
    }
}

Parallelepiped Parallelepiped::unit_cube() {
    return {TailedSequence::constant(0.0), TailedSequence::constant(1.0)};
}

Parallelepiped Parallelepiped::cube(const TailedSequence& centre, double side) {
    return {centre - side / 2, centre + side / 2};
}

Parallelepiped Parallelepiped::from_lengths(const TailedSequence& lower, const TailedSequence& lengths) {
    return {lower, lower + lengths};
}

TailedSequence Parallelepiped::centre() const { return 0.5 * (lower_ + upper_); }

MeasureValue volume(const Parallelepiped& box, double tol) { return infinite_product(box.lengths(), tol); }

Parallelepiped translate(const Parallelepiped& box, const TailedSequence& shift) {
    return {box.lower() + shift, box.upper() + shift};
}

std::optional<Parallelepiped> intersect(const Parallelepiped& p, const Parallelepiped& q) {
    TailedSequence lo = max(p.lower(), q.lower());
    TailedSequence hi = min(p.upper(), q.upper());
    if (lo.is_opaque() || hi.is_opaque())
        throw Error(ErrorCode::RepresentationOverflow, "emptiness of an opaque intersection is undecidable");
    const TailedSequence len = hi - lo;
    const SignProfile s = sign_profile(len);
    if (s.first_negative != 0) return std::nullopt;
    if (s.kind == SignProfile::Kind::Unknown)
        throw Error(ErrorCode::RepresentationOverflow, "emptiness of the intersection is undecidable");
    return Parallelepiped(std::move(lo), std::move(hi));
}

double truncated_volume(const Parallelepiped& box, std::size_t d) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    double v = 1.0;
    for (std::size_t i = 1; i <= d; ++i) v *= box.lengths()(i);
    return v;
}

std::size_t tail_deviation_index(const Parallelepiped& box, double eps, double tol) {
    const MeasureValue v = volume(box, tol);
    if (!v.is_finite() || !(v.lower() > 0.0))
        throw Error(ErrorCode::NotFinitePositive, "volume is " + to_string(v));
    const auto n = settle_index(box.lengths(), 1.0, eps);
    if (!n) throw Error(ErrorCode::NotFinitePositive, "side lengths cannot be certified to approach 1");
    return *n;
}

Bounded rho_diameter(const Parallelepiped& box, double tol) {
    // rho(a, b) is exactly the diameter: each summand is increasing in |x_i - y_i|.
    return rho_distance(box.lower(), box.upper(), tol);
}

Tri contains(const Parallelepiped& outer, const Parallelepiped& inner) {
    return both(nonnegative_difference(inner.lower(), outer.lower()),
                nonnegative_difference(outer.upper(), inner.upper()));
}

CoverEstimate cover_upper_bound(const std::vector<Parallelepiped>& targets,
                                const std::vector<std::vector<Parallelepiped>>& covers,
                                std::optional<double> diameter_cap, double tol) {
    CoverEstimate out;
    out.diameter_cap = diameter_cap;
    out.best_bound = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < covers.size(); ++c) {
        const auto& cover = covers[c];
        if (diameter_cap) {
            for (std::size_t e = 0; e < cover.size(); ++e) {
                const Bounded diam = rho_diameter(cover[e], tol);
                if (!(diam.value + diam.err <= *diameter_cap))
                    throw Error(ErrorCode::CapViolated,
                                "cover " + std::to_string(c) + " element " + std::to_string(e) +
                                    " has diameter above the cap",
                                c);
            }
        }
        CoverCandidate cand;
        double sum = 0.0;
        for (std::size_t e = 0; e < cover.size() && cand.reason.empty(); ++e) {
            const MeasureValue v = volume(cover[e], tol);
            if (v.is_undefined())
                cand.reason = "element " + std::to_string(e) + " has undefined volume";
            else if (v.is_infinite())
                sum = std::numeric_limits<double>::infinity();
            else
                sum = add_up(sum, v.upper());
        }
        for (std::size_t t = 0; t < targets.size() && cand.reason.empty(); ++t) {
            bool unknown = false, covered = false;
            for (const auto& elem : cover) {
                const Tri r = contains(elem, targets[t]);
                if (r == Tri::Yes) {
                    covered = true;
                    break;
                }
                unknown = unknown || r == Tri::Unknown;
            }
            if (!covered)
                cand.reason = "target " + std::to_string(t) +
                              (unknown ? ": containment unknown" : " is not inside any single cover element");
        }
        if (cand.reason.empty()) {
            cand.accepted = true;
            cand.bound = sum;
            if (!any || sum < out.best_bound) {
                out.best_bound = sum;
                out.best_index = c;
            }
            any = true;
        }
        out.covers.push_back(std::move(cand));
    }
    if (!any) throw Error(ErrorCode::NoValidCover, "no candidate cover contains every target");
    return out;
}

std::vector<Parallelepiped> boundary_cover(double eps, std::size_t count) {
    if (!(eps > 0.0) || count == 0) throw Error(ErrorCode::InvalidArgument, "need eps > 0 and J >= 1");
    std::vector<Parallelepiped> slabs;
    slabs.reserve(2 * count);
    for (std::size_t j = 1; j <= count; ++j) {
        const double w = std::ldexp(eps, -static_cast<int>(j) - 2);
        std::vector<double> lo(j, 0.0), hi(j, 1.0);
        lo[j - 1] = -w;
        hi[j - 1] = w;
        slabs.emplace_back(TailedSequence(lo, Constant{0.0}), TailedSequence(hi, Constant{1.0}));
        lo[j - 1] = 1.0 - w;
        hi[j - 1] = 1.0 + w;
        slabs.emplace_back(TailedSequence(lo, Constant{0.0}), TailedSequence(hi, Constant{1.0}));
    }
    return slabs;
}

std::vector<Parallelepiped> unit_cube_faces(std::size_t count) {
    std::vector<Parallelepiped> faces;
    for (std::size_t j = 1; j <= count; ++j) {
        for (double side : {0.0, 1.0}) {
            std::vector<double> lo(j, 0.0), hi(j, 1.0);
            lo[j - 1] = side;
            hi[j - 1] = side;
            faces.emplace_back(TailedSequence(lo, Constant{0.0}), TailedSequence(hi, Constant{1.0}));
        }
    }
    return faces;
}

} // namespace measinf
