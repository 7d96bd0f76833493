#ifndef HYPERBOX_DYNAMICS_HPP
#define HYPERBOX_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hyperbox/errors.hpp"
#include "hyperbox/interval.hpp"

namespace hyperbox {

enum class Family { Quadratic, CubicSym, General };

inline const char* family_name(Family f) {
    switch (f) {
    case Family::Quadratic: return "quadratic";
    case Family::CubicSym: return "cubic";
    case Family::General: return "general";
    }
    return "?";
}

inline Family parse_family(const std::string& name) {
    if (name == "quadratic") return Family::Quadratic;
    if (name == "cubic") return Family::CubicSym;
    if (name == "general") return Family::General;
    throw ParseError("unknown map family '" + name + "'");
}

// Textual map description as typed by the user. Parameters are kept as the
// original decimal strings so that certificates reproduce them verbatim.
//   quadratic: {c_re, c_im}
//   cubic:     {c_re, c_im, a_re, a_im}
//   general:   {a0_re, a0_im, a1_re, a1_im, ..., ad_re, ad_im}  (ascending powers)
struct MapSpec {
    Family family = Family::Quadratic;
    std::vector<std::string> params;

    friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

// Region [-half, half]^2 known to contain the filled Julia set, plus a radius
// beyond which every orbit escapes.
struct DynamicalBounds {
    double half = 2.0;
    double escape_radius = 2.0;

    ComplexBox region() const { return {Interval(-half, half), Interval(-half, half)}; }
};

class PolynomialMap {
public:
    static PolynomialMap from_spec(const MapSpec& spec) {
        PolynomialMap m;
        m.spec_ = spec;
        auto box_at = [&](std::size_t k) { return ComplexBox{hull(spec.params.at(k)), hull(spec.params.at(k + 1))}; };
        switch (spec.family) {
        case Family::Quadratic:
            if (spec.params.size() != 2) throw ParseError("quadratic map needs c as RE IM");
            m.c_ = box_at(0);
            m.degree_ = 2;
            break;
        case Family::CubicSym:
            if (spec.params.size() != 4) throw ParseError("cubic map needs c and a as RE IM pairs");
            m.c_ = box_at(0);
            m.a_ = box_at(2);
            m.three_a2_ = Interval::point(3.0) * sqr(m.a_);
            m.degree_ = 3;
            break;
        case Family::General: {
            if (spec.params.size() < 6 || spec.params.size() % 2 != 0) {
                throw ParseError("general map needs at least three RE IM coefficient pairs");
            }
            for (std::size_t k = 0; k < spec.params.size(); k += 2) m.coeffs_.push_back(box_at(k));
            m.degree_ = static_cast<int>(m.coeffs_.size()) - 1;
            if (m.coeffs_.back().contains_zero()) throw ParameterOutOfRange("leading coefficient contains zero");
            for (std::size_t k = 1; k < m.coeffs_.size(); ++k) {
                const Interval kk = Interval::point(static_cast<double>(k));
                m.dcoeffs_.push_back(kk * m.coeffs_[k]);
            }
            break;
        }
        }
        return m;
    }

    static PolynomialMap quadratic(std::string c_re, std::string c_im) {
        return from_spec({Family::Quadratic, {std::move(c_re), std::move(c_im)}});
    }
    static PolynomialMap cubic(std::string c_re, std::string c_im, std::string a_re, std::string a_im) {
        return from_spec({Family::CubicSym, {std::move(c_re), std::move(c_im), std::move(a_re), std::move(a_im)}});
    }

    Family family() const { return spec_.family; }
    int degree() const { return degree_; }
    const MapSpec& spec() const { return spec_; }
    const ComplexBox& c() const { return c_; }
    const ComplexBox& a() const { return a_; }
    const std::vector<ComplexBox>& coefficients() const { return coeffs_; }

    // Enclosure of f(b).
    ComplexBox eval(const ComplexBox& z) const {
        switch (spec_.family) {
        case Family::Quadratic: return sqr(z) + c_;
        case Family::CubicSym: return z * (sqr(z) - ComplexBox{three_a2_.re, three_a2_.im}) + c_;
        case Family::General: return horner(coeffs_, z);
        }
        return z;
    }

    // Enclosure of f'(b).
    ComplexBox deriv(const ComplexBox& z) const {
        switch (spec_.family) {
        case Family::Quadratic: return Interval::point(2.0) * z;
        case Family::CubicSym: return Interval::point(3.0) * (sqr(z) - sqr(a_));
        case Family::General: return horner(dcoeffs_, z);
        }
        return z;
    }

    // Plain floating evaluation at a point; not rigorous.
    std::complex<double> eval_point(std::complex<double> z) const {
        switch (spec_.family) {
        case Family::Quadratic: return z * z + c_.mid();
        case Family::CubicSym: {
            const auto a = a_.mid();
            return z * z * z - 3.0 * a * a * z + c_.mid();
        }
        case Family::General: {
            std::complex<double> r = coeffs_.back().mid();
            for (std::size_t k = coeffs_.size() - 1; k-- > 0;) r = r * z + coeffs_[k].mid();
            return r;
        }
        }
        return z;
    }

private:
    static ComplexBox horner(const std::vector<ComplexBox>& coeffs, const ComplexBox& z) {
        ComplexBox r = coeffs.back();
        for (std::size_t k = coeffs.size() - 1; k-- > 0;) r = r * z + coeffs[k];
        return r;
    }

    MapSpec spec_;
    int degree_ = 2;
    ComplexBox c_{};
    ComplexBox a_{};
    ComplexBox three_a2_{};
    std::vector<ComplexBox> coeffs_;
    std::vector<ComplexBox> dcoeffs_;
};

inline ComplexBox eval_box(const PolynomialMap& f, const ComplexBox& b) { return f.eval(b); }
inline ComplexBox deriv_box(const PolynomialMap& f, const ComplexBox& b) { return f.deriv(b); }

// Rigorous lower bound of |f'| over b; 0 whenever the derivative enclosure
// reaches the origin.
inline double multiplier_lower(const PolynomialMap& f, const ComplexBox& b) {
    return modulus_lower(f.deriv(b));
}

inline DynamicalBounds dynamical_bounds(const PolynomialMap& f) {
    using namespace rounding;
    switch (f.family()) {
    case Family::Quadratic:
        if (!(modulus_upper(f.c()) < 2.0)) throw ParameterOutOfRange("quadratic family requires |c| < 2");
        return {2.0, 2.0};
    case Family::CubicSym: {
        if (!(modulus_upper(f.c()) < 2.0)) throw ParameterOutOfRange("cubic family requires |c| < 2");
        const double a_up = modulus_upper(f.a());
        if (!(mul_up(a_up, a_up) < div_down(2.0, 3.0))) {
            throw ParameterOutOfRange("cubic family requires |a| < (2/3)^(1/2)");
        }
        return {2.0, 2.0};
    }
    case Family::General: {
        // For |z| >= R = max(1, (S + 2)/|a_d|), S = sum_{k<d} |a_k|:
        // |f(z)| >= |z|^(d-1) (|a_d||z| - S) >= 2|z|.
        const auto& co = f.coefficients();
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < co.size(); ++k) s = add_up(s, modulus_upper(co[k]));
        const double lead = modulus_lower(co.back());
        if (!(lead > 0.0)) throw ParameterOutOfRange("leading coefficient contains zero");
        const double r = std::max(1.0, div_up(add_up(s, 2.0), lead));
        if (!std::isfinite(r) || r > 0x1p20) throw ParameterOutOfRange("escape radius too large to grid");
        double half = 1.0;
        while (half <= r) half *= 2.0;
        return {half, r};
    }
    }
    throw ParameterOutOfRange("unknown family");
}

struct CriticalSet {
    std::vector<ComplexBox> points;
};

namespace detail {

inline std::vector<ComplexBox> cluster_boxes(std::vector<ComplexBox> boxes) {
    // Union-find over touching boxes; each component becomes one enclosure.
    std::vector<std::size_t> parent(boxes.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            if (boxes[i].intersects(boxes[j])) parent[find(i)] = find(j);
        }
    }
    std::vector<ComplexBox> out;
    std::vector<std::ptrdiff_t> slot(boxes.size(), -1);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<std::ptrdiff_t>(out.size());
            out.push_back(boxes[i]);
        } else {
            auto& h = out[static_cast<std::size_t>(slot[r])];
            h = {join(h.re, boxes[i].re), join(h.im, boxes[i].im)};
        }
    }
    return out;
}

} // namespace detail

inline CriticalSet critical_points(const PolynomialMap& f, double resolution = 1e-12) {
    switch (f.family()) {
    case Family::Quadratic: return {{ComplexBox::point(0.0, 0.0)}};
    case Family::CubicSym: {
        const ComplexBox a = f.a();
        if (a.intersects(-a)) return {{ComplexBox{join(a.re, -a.re), join(a.im, -a.im)}}};
        return {{a, -a}};
    }
    case Family::General: break;
    }
    const ComplexBox region = dynamical_bounds(f).region();
    std::vector<ComplexBox> work{region};
    std::vector<ComplexBox> kept;
    constexpr std::size_t kMaxBoxes = 1'000'000;
    while (!work.empty()) {
        const ComplexBox b = work.back();
        work.pop_back();
        if (!f.deriv(b).contains_zero()) continue;
        if (b.re.width_up() <= resolution && b.im.width_up() <= resolution) {
            kept.push_back(b);
            continue;
        }
        const double mx = b.re.mid();
        const double my = b.im.mid();
        work.push_back({Interval(b.re.lo(), mx), Interval(b.im.lo(), my)});
        work.push_back({Interval(mx, b.re.hi()), Interval(b.im.lo(), my)});
        work.push_back({Interval(b.re.lo(), mx), Interval(my, b.im.hi())});
        work.push_back({Interval(mx, b.re.hi()), Interval(my, b.im.hi())});
        if (work.size() + kept.size() > kMaxBoxes) throw Error("critical point bisection did not converge");
    }
    auto clusters = detail::cluster_boxes(std::move(kept));
    std::sort(clusters.begin(), clusters.end(), [](const ComplexBox& x, const ComplexBox& y) {
        return std::pair(x.re.lo(), x.im.lo()) < std::pair(y.re.lo(), y.im.lo());
    });
    return {std::move(clusters)};
}

} // namespace hyperbox

#endif
