#include "spraylab/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spraylab {

namespace {

void require_positive(int value, const char* what) {
  if (value < 1) throw DomainError(std::string("VarietySpec: ") + what + " must be >= 1");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw UsageError("VarietySpec: empty integer");
  int value = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw UsageError("VarietySpec: bad integer '" + std::string(s) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

// Splits "a,b(c,d),e" at top-level commas.
std::vector<std::string_view> split_args(std::string_view s) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

// Orthonormal basis of the complement of `normal`: Gram-Schmidt over the coordinate axes,
// skipping the axis where |normal_i| is largest.
Matrix complement_basis(const Vector& normal) {
  const Eigen::Index dim = normal.size();
  Eigen::Index drop = 0;
  normal.cwiseAbs().maxCoeff(&drop);
  const Vector unit = normal.normalized();
  Matrix basis(dim, dim - 1);
  Eigen::Index col = 0;
  for (Eigen::Index axis = 0; axis < dim; ++axis) {
    if (axis == drop) continue;
    Vector e = Vector::Unit(dim, axis);
    e -= unit.dot(e) * unit;
    for (Eigen::Index j = 0; j < col; ++j) e -= basis.col(j).dot(e) * basis.col(j);
    basis.col(col++) = e.normalized();
  }
  return basis;
}

Matrix orthonormalize_columns(const Matrix& a) {
  const Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  // Fix signs so each column has a positive projection on the corresponding input column.
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (q.col(j).dot(a.col(j)) < 0.0) q.col(j) *= -1.0;
  return q;
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  return a;
}

}  // namespace

// --- VarietySpec ------------------------------------------------------------

VarietySpec::VarietySpec(Kind kind, int n, int k, std::vector<VarietySpec> parts)
    : kind_(kind), n_(n), k_(k), parts_(std::move(parts)) {}

VarietySpec VarietySpec::sphere(int n) {
  require_positive(n, "n");
  return {Kind::Sphere, n, 1, {}};
}

VarietySpec VarietySpec::fermat_sphere(int n, int k) {
  require_positive(n, "n");
  require_positive(k, "k");
  return {Kind::FermatSphere, n, k, {}};
}

VarietySpec VarietySpec::orthogonal(int m) {
  require_positive(m, "m");
  return {Kind::O, m, 1, {}};
}

VarietySpec VarietySpec::special_orthogonal(int m) {
  require_positive(m, "m");
  return {Kind::SO, m, 1, {}};
}

VarietySpec VarietySpec::unitary(int m) {
  require_positive(m, "m");
  return {Kind::U, m, 1, {}};
}

VarietySpec VarietySpec::special_unitary(int m) {
  require_positive(m, "m");
  return {Kind::SU, m, 1, {}};
}

VarietySpec VarietySpec::product(std::vector<VarietySpec> parts) {
  if (parts.empty()) throw DomainError("VarietySpec: empty product");
  return {Kind::Product, 0, 1, std::move(parts)};
}

VarietySpec VarietySpec::parse(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos) {
    if (text.size() >= 2 && text[0] == 'S') return sphere(parse_int(text.substr(1)));
    throw UsageError("VarietySpec: cannot parse '" + std::string(text) + "'");
  }
  if (text.back() != ')') throw UsageError("VarietySpec: unbalanced '" + std::string(text) + "'");
  const std::string_view head = trim(text.substr(0, open));
  const auto args = split_args(text.substr(open + 1, text.size() - open - 2));
  if (head == "Product") {
    std::vector<VarietySpec> parts;
    for (auto a : args) parts.push_back(parse(a));
    return product(std::move(parts));
  }
  if (head == "Fermat") {
    if (args.size() != 2) throw UsageError("VarietySpec: Fermat(n,2k) takes two arguments");
    const int exponent = parse_int(args[1]);
    if (exponent % 2 != 0) throw UsageError("VarietySpec: Fermat exponent must be even");
    return fermat_sphere(parse_int(args[0]), exponent / 2);
  }
  if (args.size() != 1) throw UsageError("VarietySpec: group takes one argument");
  const int m = parse_int(args[0]);
  if (head == "O") return orthogonal(m);
  if (head == "SO") return special_orthogonal(m);
  if (head == "U") return unitary(m);
  if (head == "SU") return special_unitary(m);
  throw UsageError("VarietySpec: unknown kind '" + std::string(head) + "'");
}

bool VarietySpec::is_group() const {
  return kind_ == Kind::O || kind_ == Kind::SO || kind_ == Kind::U || kind_ == Kind::SU;
}

Eigen::Index VarietySpec::ambient_dim() const {
  switch (kind_) {
    case Kind::Sphere:
    case Kind::FermatSphere:
      return n_ + 1;
    case Kind::O:
    case Kind::SO:
      return static_cast<Eigen::Index>(n_) * n_;
    case Kind::U:
    case Kind::SU:
      return 2 * static_cast<Eigen::Index>(n_) * n_;
    case Kind::Product: {
      Eigen::Index total = 0;
      for (const auto& p : parts_) total += p.ambient_dim();
      return total;
    }
  }
  return 0;
}

int VarietySpec::dim() const {
  switch (kind_) {
    case Kind::Sphere:
    case Kind::FermatSphere:
      return n_;
    case Kind::O:
    case Kind::SO:
      return n_ * (n_ - 1) / 2;
    case Kind::U:
      return n_ * n_;
    case Kind::SU:
      return n_ * n_ - 1;
    case Kind::Product: {
      int total = 0;
      for (const auto& p : parts_) total += p.dim();
      return total;
    }
  }
  return 0;
}

std::string VarietySpec::name() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Sphere: os << 'S' << n_; break;
    case Kind::FermatSphere: os << "Fermat(" << n_ << ',' << 2 * k_ << ')'; break;
    case Kind::O: os << "O(" << n_ << ')'; break;
    case Kind::SO: os << "SO(" << n_ << ')'; break;
    case Kind::U: os << "U(" << n_ << ')'; break;
    case Kind::SU: os << "SU(" << n_ << ')'; break;
    case Kind::Product:
      os << "Product(";
      for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i].name();
      os << ')';
      break;
  }
  return os.str();
}

// --- realification ----------------------------------------------------------

Vector interleave(const ComplexVector& z) {
  Vector x(2 * z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    x(2 * i) = z(i).real();
    x(2 * i + 1) = z(i).imag();
  }
  return x;
}

ComplexVector deinterleave(const Vector& x) {
  if (x.size() % 2 != 0) throw ShapeError("deinterleave: odd length");
  ComplexVector z(x.size() / 2);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = {x(2 * i), x(2 * i + 1)};
  return z;
}

Vector flatten(const Matrix& a) {
  Vector x(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) x(i * a.cols() + j) = a(i, j);
  return x;
}

Matrix unflatten(const Vector& x, Eigen::Index rows, Eigen::Index cols) {
  if (x.size() != rows * cols) throw ShapeError("unflatten: size mismatch");
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = x(i * cols + j);
  return a;
}

Vector realify(const ComplexMatrix& a) {
  Vector x(2 * a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const Eigen::Index at = 2 * (i * a.cols() + j);
      x(at) = a(i, j).real();
      x(at + 1) = a(i, j).imag();
    }
  return x;
}

ComplexMatrix complexify(const Vector& x, Eigen::Index rows, Eigen::Index cols) {
  if (x.size() != 2 * rows * cols) throw ShapeError("complexify: size mismatch");
  ComplexMatrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Eigen::Index at = 2 * (i * cols + j);
      a(i, j) = {x(at), x(at + 1)};
    }
  return a;
}

ComplexMatrix group_matrix(const Vector& p, const VarietySpec& group) {
  const int m = group.m();
  switch (group.kind()) {
    case VarietySpec::Kind::O:
    case VarietySpec::Kind::SO:
      return unflatten(p, m, m).cast<std::complex<double>>();
    case VarietySpec::Kind::U:
    case VarietySpec::Kind::SU:
      return complexify(p, m, m);
    default:
      throw DomainError("group_matrix: " + group.name() + " is not a matrix group");
  }
}

Vector group_point(const ComplexMatrix& g, const VarietySpec& group) {
  if (!group.is_group()) throw DomainError("group_point: " + group.name() + " is not a matrix group");
  if (g.rows() != group.m() || g.cols() != group.m()) throw ShapeError("group_point: size mismatch");
  return group.is_complex_group() ? realify(g) : flatten(g.real());
}

std::vector<Vector> split_product(const Vector& p, const VarietySpec& product) {
  if (product.kind() != VarietySpec::Kind::Product)
    throw DomainError("split_product: not a product variety");
  if (p.size() != product.ambient_dim()) throw ShapeError("split_product: dimension mismatch");
  std::vector<Vector> out;
  Eigen::Index offset = 0;
  for (const auto& part : product.parts()) {
    out.push_back(p.segment(offset, part.ambient_dim()));
    offset += part.ambient_dim();
  }
  return out;
}

Vector join_product(const std::vector<Vector>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector out(total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.segment(offset, p.size()) = p;
    offset += p.size();
  }
  return out;
}

// --- membership -------------------------------------------------------------

void require_finite(const Vector& p, std::string_view what) {
  if (!p.allFinite()) throw DomainError(std::string(what) + ": non-finite coordinates");
}

double membership_violation(const Vector& p, const VarietySpec& variety) {
  if (p.size() != variety.ambient_dim())
    throw ShapeError("membership: point has dimension " + std::to_string(p.size()) + ", " +
                     variety.name() + " expects " + std::to_string(variety.ambient_dim()));
  if (!p.allFinite()) return std::numeric_limits<double>::infinity();
  switch (variety.kind()) {
    case VarietySpec::Kind::Sphere:
      return std::abs(p.squaredNorm() - 1.0);
    case VarietySpec::Kind::FermatSphere:
      return std::abs(p.array().pow(2 * variety.k()).sum() - 1.0);
    case VarietySpec::Kind::O:
    case VarietySpec::Kind::SO: {
      const Matrix q = unflatten(p, variety.m(), variety.m());
      double v = (q * q.transpose() - Matrix::Identity(variety.m(), variety.m())).cwiseAbs().maxCoeff();
      if (variety.kind() == VarietySpec::Kind::SO) v = std::max(v, std::abs(q.determinant() - 1.0));
      return v;
    }
    case VarietySpec::Kind::U:
    case VarietySpec::Kind::SU: {
      const ComplexMatrix q = complexify(p, variety.m(), variety.m());
      double v = (q * q.adjoint() - ComplexMatrix::Identity(variety.m(), variety.m())).cwiseAbs().maxCoeff();
      if (variety.kind() == VarietySpec::Kind::SU)
        v = std::max(v, std::abs(q.determinant() - std::complex<double>(1.0, 0.0)));
      return v;
    }
    case VarietySpec::Kind::Product: {
      double v = 0.0;
      const auto parts = split_product(p, variety);
      for (std::size_t i = 0; i < parts.size(); ++i)
        v = std::max(v, membership_violation(parts[i], variety.parts()[i]));
      return v;
    }
  }
  return std::numeric_limits<double>::infinity();
}

bool is_member(const Vector& p, const VarietySpec& variety, double tol) {
  return membership_violation(p, variety) <= tol;
}

// --- building blocks --------------------------------------------------------

Vector fermat_power_map(const Vector& x, int k) {
  if (k < 1 || k % 2 == 0) throw DomainError("fermat_power_map: k must be a positive odd integer");
  if (x.size() < 2) throw ShapeError("fermat_power_map: need at least two coordinates");
  const auto fermat = VarietySpec::fermat_sphere(static_cast<int>(x.size()) - 1, k);
  if (!is_member(x, fermat, kDefaultMemberTol))
    throw DomainError("fermat_power_map: point is not on " + fermat.name());
  return x.array().pow(k).matrix();
}

Vector fermat_power_inverse(const Vector& y, int k) {
  if (k < 1 || k % 2 == 0) throw DomainError("fermat_power_inverse: k must be a positive odd integer");
  return y.unaryExpr([k](double v) { return std::copysign(std::pow(std::abs(v), 1.0 / k), v); });
}

Vector to_fermat_sphere(const Vector& x, int k) {
  const double scale = std::pow(x.array().pow(2 * k).sum(), -1.0 / (2 * k));
  return scale * x;
}

Matrix sphere_tangent_basis(const Vector& p) {
  if (p.size() < 2) throw ShapeError("sphere_tangent_basis: need at least two coordinates");
  return complement_basis(p);
}

Matrix tangent_basis(const Vector& p, const VarietySpec& variety) {
  if (p.size() != variety.ambient_dim()) throw ShapeError("tangent_basis: dimension mismatch");
  switch (variety.kind()) {
    case VarietySpec::Kind::Sphere:
      return sphere_tangent_basis(p);
    case VarietySpec::Kind::FermatSphere:
      return complement_basis(p.array().pow(2 * variety.k() - 1).matrix());
    case VarietySpec::Kind::O:
    case VarietySpec::Kind::SO:
    case VarietySpec::Kind::U:
    case VarietySpec::Kind::SU: {
      const ComplexMatrix q = group_matrix(p, variety);
      const auto basis = lie_algebra_basis(variety);
      Matrix cols(p.size(), static_cast<Eigen::Index>(basis.size()));
      for (std::size_t i = 0; i < basis.size(); ++i)
        cols.col(static_cast<Eigen::Index>(i)) = group_point(basis[i] * q, variety);
      return orthonormalize_columns(cols);
    }
    case VarietySpec::Kind::Product: {
      const auto parts = split_product(p, variety);
      Matrix out = Matrix::Zero(variety.ambient_dim(), variety.dim());
      Eigen::Index row = 0;
      Eigen::Index col = 0;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const Matrix t = tangent_basis(parts[i], variety.parts()[i]);
        out.block(row, col, t.rows(), t.cols()) = t;
        row += t.rows();
        col += t.cols();
      }
      return out;
    }
  }
  return {};
}

std::vector<ComplexMatrix> lie_algebra_basis(const VarietySpec& group) {
  if (!group.is_group()) throw DomainError("lie_algebra_basis: " + group.name() + " is not a group");
  const int m = group.m();
  const std::complex<double> i1(0.0, 1.0);
  std::vector<ComplexMatrix> basis;
  for (int r = 0; r < m; ++r)
    for (int c = r + 1; c < m; ++c) {
      ComplexMatrix e = ComplexMatrix::Zero(m, m);
      e(r, c) = 1.0;
      e(c, r) = -1.0;
      basis.push_back(e);
    }
  if (!group.is_complex_group()) return basis;
  for (int r = 0; r < m; ++r)
    for (int c = r + 1; c < m; ++c) {
      ComplexMatrix e = ComplexMatrix::Zero(m, m);
      e(r, c) = i1;
      e(c, r) = i1;
      basis.push_back(e);
    }
  if (group.kind() == VarietySpec::Kind::U) {
    for (int r = 0; r < m; ++r) {
      ComplexMatrix e = ComplexMatrix::Zero(m, m);
      e(r, r) = i1;
      basis.push_back(e);
    }
  } else {
    for (int r = 0; r + 1 < m; ++r) {
      ComplexMatrix e = ComplexMatrix::Zero(m, m);
      e(r, r) = i1;
      e(r + 1, r + 1) = -i1;
      basis.push_back(e);
    }
  }
  return basis;
}

Vector random_point(const VarietySpec& variety, Rng& rng) {
  switch (variety.kind()) {
    case VarietySpec::Kind::Sphere:
      return gaussian_matrix(variety.ambient_dim(), 1, rng).col(0).normalized();
    case VarietySpec::Kind::FermatSphere:
      return to_fermat_sphere(gaussian_matrix(variety.ambient_dim(), 1, rng).col(0), variety.k());
    case VarietySpec::Kind::O:
    case VarietySpec::Kind::SO: {
      const int m = variety.m();
      const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(m, m, rng));
      Matrix q = qr.householderQ();
      const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int j = 0; j < m; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
      bool want_negative = false;
      if (variety.kind() == VarietySpec::Kind::O) want_negative = std::bernoulli_distribution(0.5)(rng);
      if ((q.determinant() < 0.0) != want_negative) q.col(0) *= -1.0;
      return flatten(q);
    }
    case VarietySpec::Kind::U:
    case VarietySpec::Kind::SU: {
      const int m = variety.m();
      ComplexMatrix a(m, m);
      const Matrix re = gaussian_matrix(m, m, rng);
      const Matrix im = gaussian_matrix(m, m, rng);
      a.real() = re;
      a.imag() = im;
      const Eigen::HouseholderQR<ComplexMatrix> qr(a);
      ComplexMatrix q = qr.householderQ();
      const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int j = 0; j < m; ++j)
        if (std::abs(r(j, j)) > 0.0) q.col(j) *= r(j, j) / std::abs(r(j, j));
      if (variety.kind() == VarietySpec::Kind::SU) {
        const std::complex<double> det = q.determinant();
        q.col(0) *= std::conj(det) / std::abs(det);
      }
      return realify(q);
    }
    case VarietySpec::Kind::Product: {
      std::vector<Vector> parts;
      for (const auto& part : variety.parts()) parts.push_back(random_point(part, rng));
      return join_product(parts);
    }
  }
  return {};
}

PointSet quasi_uniform_sphere(int n, Eigen::Index count, std::uint64_t seed) {
  if (n < 1) throw DomainError("quasi_uniform_sphere: n must be >= 1");
  PointSet pts(n + 1, count);
  if (n == 1) {
    for (Eigen::Index j = 0; j < count; ++j) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(count);
      pts(0, j) = std::cos(theta);
      pts(1, j) = std::sin(theta);
    }
  } else if (n == 2) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (Eigen::Index j = 0; j < count; ++j) {
      const double z = 1.0 - (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(j);
      pts(0, j) = r * std::cos(phi);
      pts(1, j) = r * std::sin(phi);
      pts(2, j) = z;
    }
  } else {
    Rng rng(seed);
    pts = gaussian_matrix(n + 1, count, rng);
    pts.colwise().normalize();
  }
  return pts;
}

}  // namespace spraylab
