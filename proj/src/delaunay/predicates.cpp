#include "geofuse/delaunay/predicates.hpp"

#include <atomic>
#include <cmath>

namespace geofuse::predicates {

namespace {

// Half an ulp of 1.0; the unit roundoff of IEEE double.
constexpr double kEps = 0x1p-53;
constexpr double kCcwErrBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kO3dErrBound = (7.0 + 56.0 * kEps) * kEps;
constexpr double kIspErrBound = (16.0 + 224.0 * kEps) * kEps;

std::atomic<std::uint64_t> g_orient_fallbacks{0};
std::atomic<std::uint64_t> g_sphere_fallbacks{0};

// Non-overlapping floating-point expansion, components in increasing
// magnitude with zeros eliminated. The represented value is the exact sum.
class Expansion {
 public:
  Expansion() = default;
  explicit Expansion(double v) {
    if (v != 0.0) c_.push_back(v);
  }

  static Expansion diff(double a, double b) {
    const double x = a - b;
    const double bv = a - x;
    const double av = x + bv;
    const double y = (a - av) + (bv - b);
    Expansion e;
    if (y != 0.0) e.c_.push_back(y);
    if (x != 0.0) e.c_.push_back(x);
    return e;
  }

  [[nodiscard]] int sign() const {
    if (c_.empty()) return 0;
    return c_.back() > 0.0 ? 1 : -1;
  }

  friend Expansion operator+(const Expansion& e, const Expansion& f) {
    Expansion h = e;
    for (const double b : f.c_) h.grow(b);
    return h;
  }
  friend Expansion operator-(const Expansion& e, const Expansion& f) {
    Expansion h = e;
    for (const double b : f.c_) h.grow(-b);
    return h;
  }
  friend Expansion operator*(const Expansion& e, const Expansion& f) {
    Expansion h;
    for (const double b : f.c_) h = h + e.scaled(b);
    return h;
  }

 private:
  static void two_sum(double a, double b, double& x, double& y) {
    x = a + b;
    const double bv = x - a;
    const double av = x - bv;
    y = (a - av) + (b - bv);
  }
  static void fast_two_sum(double a, double b, double& x, double& y) {
    x = a + b;
    y = b - (x - a);
  }
  static void two_product(double a, double b, double& x, double& y) {
    x = a * b;
    y = std::fma(a, b, -x);
  }

  void grow(double b) {
    std::vector<double> h;
    h.reserve(c_.size() + 1);
    double q = b;
    for (const double e : c_) {
      double sum = 0.0, err = 0.0;
      two_sum(q, e, sum, err);
      if (err != 0.0) h.push_back(err);
      q = sum;
    }
    if (q != 0.0) h.push_back(q);
    c_ = std::move(h);
  }

  [[nodiscard]] Expansion scaled(double b) const {
    Expansion h;
    if (c_.empty() || b == 0.0) return h;
    double q = 0.0, hh = 0.0;
    two_product(c_[0], b, q, hh);
    if (hh != 0.0) h.c_.push_back(hh);
    for (std::size_t i = 1; i < c_.size(); ++i) {
      double p1 = 0.0, p0 = 0.0, sum = 0.0;
      two_product(c_[i], b, p1, p0);
      two_sum(q, p0, sum, hh);
      if (hh != 0.0) h.c_.push_back(hh);
      fast_two_sum(p1, sum, q, hh);
      if (hh != 0.0) h.c_.push_back(hh);
    }
    if (q != 0.0) h.c_.push_back(q);
    return h;
  }

  std::vector<double> c_;
};

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Shewchuk's orientation convention: positive when d lies below the plane
// through a, b, c seen counter-clockwise from above.
int shewchuk_orient3d(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd) {
  const double adx = pa.x() - pd.x(), bdx = pb.x() - pd.x(), cdx = pc.x() - pd.x();
  const double ady = pa.y() - pd.y(), bdy = pb.y() - pd.y(), cdy = pc.y() - pd.y();
  const double adz = pa.z() - pd.z(), bdz = pb.z() - pd.z(), cdz = pc.z() - pd.z();

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;

  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                           (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                           (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  const double bound = kO3dErrBound * permanent;
  if (det > bound || -det > bound) return sign_of(det);

  g_orient_fallbacks.fetch_add(1, std::memory_order_relaxed);
  const Expansion eadx = Expansion::diff(pa.x(), pd.x()), ebdx = Expansion::diff(pb.x(), pd.x()),
                  ecdx = Expansion::diff(pc.x(), pd.x());
  const Expansion eady = Expansion::diff(pa.y(), pd.y()), ebdy = Expansion::diff(pb.y(), pd.y()),
                  ecdy = Expansion::diff(pc.y(), pd.y());
  const Expansion eadz = Expansion::diff(pa.z(), pd.z()), ebdz = Expansion::diff(pb.z(), pd.z()),
                  ecdz = Expansion::diff(pc.z(), pd.z());
  const Expansion exact = eadz * (ebdx * ecdy - ecdx * ebdy) + ebdz * (ecdx * eady - eadx * ecdy) +
                          ecdz * (eadx * ebdy - ebdx * eady);
  return exact.sign();
}

// Shewchuk's insphere: positive when e is inside the sphere through a, b,
// c, d given shewchuk_orient3d(a, b, c, d) > 0.
int shewchuk_insphere(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd, const Vec3& pe) {
  const double aex = pa.x() - pe.x(), bex = pb.x() - pe.x(), cex = pc.x() - pe.x(), dex = pd.x() - pe.x();
  const double aey = pa.y() - pe.y(), bey = pb.y() - pe.y(), cey = pc.y() - pe.y(), dey = pd.y() - pe.y();
  const double aez = pa.z() - pe.z(), bez = pb.z() - pe.z(), cez = pc.z() - pe.z(), dez = pd.z() - pe.z();

  const double aexbey = aex * bey, bexaey = bex * aey;
  const double bexcey = bex * cey, cexbey = cex * bey;
  const double cexdey = cex * dey, dexcey = dex * cey;
  const double dexaey = dex * aey, aexdey = aex * dey;
  const double aexcey = aex * cey, cexaey = cex * aey;
  const double bexdey = bex * dey, dexbey = dex * bey;
  const double ab = aexbey - bexaey, bc = bexcey - cexbey, cd = cexdey - dexcey;
  const double da = dexaey - aexdey, ac = aexcey - cexaey, bd = bexdey - dexbey;

  const double abc = aez * bc - bez * ac + cez * ab;
  const double bcd = bez * cd - cez * bd + dez * bc;
  const double cda = cez * da + dez * ac + aez * cd;
  const double dab = dez * ab + aez * bd + bez * da;

  const double alift = aex * aex + aey * aey + aez * aez;
  const double blift = bex * bex + bey * bey + bez * bez;
  const double clift = cex * cex + cey * cey + cez * cez;
  const double dlift = dex * dex + dey * dey + dez * dez;

  const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

  const double aezp = std::abs(aez), bezp = std::abs(bez), cezp = std::abs(cez), dezp = std::abs(dez);
  const double aexbeyp = std::abs(aexbey), bexaeyp = std::abs(bexaey);
  const double bexceyp = std::abs(bexcey), cexbeyp = std::abs(cexbey);
  const double cexdeyp = std::abs(cexdey), dexceyp = std::abs(dexcey);
  const double dexaeyp = std::abs(dexaey), aexdeyp = std::abs(aexdey);
  const double aexceyp = std::abs(aexcey), cexaeyp = std::abs(cexaey);
  const double bexdeyp = std::abs(bexdey), dexbeyp = std::abs(dexbey);
  const double permanent =
      ((cexdeyp + dexceyp) * bezp + (dexbeyp + bexdeyp) * cezp + (bexceyp + cexbeyp) * dezp) * alift +
      ((dexaeyp + aexdeyp) * cezp + (aexceyp + cexaeyp) * dezp + (cexdeyp + dexceyp) * aezp) * blift +
      ((aexbeyp + bexaeyp) * dezp + (bexdeyp + dexbeyp) * aezp + (dexaeyp + aexdeyp) * bezp) * clift +
      ((bexceyp + cexbeyp) * aezp + (cexaeyp + aexceyp) * bezp + (aexbeyp + bexaeyp) * cezp) * dlift;
  const double bound = kIspErrBound * permanent;
  if (det > bound || -det > bound) return sign_of(det);

  g_sphere_fallbacks.fetch_add(1, std::memory_order_relaxed);
  const Expansion x[4] = {Expansion::diff(pa.x(), pe.x()), Expansion::diff(pb.x(), pe.x()),
                          Expansion::diff(pc.x(), pe.x()), Expansion::diff(pd.x(), pe.x())};
  const Expansion y[4] = {Expansion::diff(pa.y(), pe.y()), Expansion::diff(pb.y(), pe.y()),
                          Expansion::diff(pc.y(), pe.y()), Expansion::diff(pd.y(), pe.y())};
  const Expansion z[4] = {Expansion::diff(pa.z(), pe.z()), Expansion::diff(pb.z(), pe.z()),
                          Expansion::diff(pc.z(), pe.z()), Expansion::diff(pd.z(), pe.z())};
  auto cross = [&](int i, int j) { return x[i] * y[j] - x[j] * y[i]; };
  const Expansion eab = cross(0, 1), ebc = cross(1, 2), ecd = cross(2, 3);
  const Expansion eda = cross(3, 0), eac = cross(0, 2), ebd = cross(1, 3);
  const Expansion eabc = z[0] * ebc - z[1] * eac + z[2] * eab;
  const Expansion ebcd = z[1] * ecd - z[2] * ebd + z[3] * ebc;
  const Expansion ecda = z[2] * eda + z[3] * eac + z[0] * ecd;
  const Expansion edab = z[3] * eab + z[0] * ebd + z[1] * eda;
  auto lift = [&](int i) { return x[i] * x[i] + y[i] * y[i] + z[i] * z[i]; };
  const Expansion exact = (lift(3) * eabc - lift(2) * edab) + (lift(1) * ecda - lift(0) * ebcd);
  return exact.sign();
}

}  // namespace

int orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
  const double detleft = (ax - cx) * (by - cy);
  const double detright = (ay - cy) * (bx - cx);
  const double det = detleft - detright;
  const double bound = kCcwErrBound * (std::abs(detleft) + std::abs(detright));
  if (det > bound || -det > bound) return sign_of(det);
  const Expansion exact = Expansion::diff(ax, cx) * Expansion::diff(by, cy) -
                          Expansion::diff(ay, cy) * Expansion::diff(bx, cx);
  return exact.sign();
}

int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return -shewchuk_orient3d(a, b, c, d);
}

int in_sphere_oriented(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  return -shewchuk_insphere(a, b, c, d, e);
}

int in_sphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  const int o = orient3d(a, b, c, d);
  if (o == 0) throw Error("in_sphere: degenerate tetrahedron (coplanar vertices)");
  return o * in_sphere_oriented(a, b, c, d, e);
}

int orient3d_perturbed_first(const Vec3& p, const Vec3& x, const Vec3& y, const Vec3& z) {
  const int s = orient3d(p, x, y, z);
  if (s != 0) return s;
  // orient3d(p + delta, x, y, z) = orient3d(p, x, y, z) - delta . ((y-x) x (z-x)).
  const int nx = orient2d(x.y(), x.z(), y.y(), y.z(), z.y(), z.z());
  if (nx != 0) return -nx;
  const int ny = orient2d(x.z(), x.x(), y.z(), y.x(), z.z(), z.x());
  if (ny != 0) return -ny;
  return -orient2d(x.x(), x.y(), y.x(), y.y(), z.x(), z.y());
}

FallbackStats fallback_stats() {
  return {g_orient_fallbacks.load(std::memory_order_relaxed), g_sphere_fallbacks.load(std::memory_order_relaxed)};
}

}  // namespace geofuse::predicates
