#include "cln/matrix.hpp"

#include <algorithm>
#include <sstream>

namespace cln {

bool VecGF::is_zero() const {
  for (scalar c : v_)
    if (c != 0) return false;
  return true;
}

VecGF VecGF::operator+(const VecGF& o) const {
  const Field& F = *f_;
  VecGF r(f_, v_.size());
  for (size_t i = 0; i < v_.size(); ++i) r.v_[i] = F.add(v_[i], o.v_[i]);
  return r;
}

VecGF VecGF::operator-(const VecGF& o) const {
  const Field& F = *f_;
  VecGF r(f_, v_.size());
  for (size_t i = 0; i < v_.size(); ++i) r.v_[i] = F.sub(v_[i], o.v_[i]);
  return r;
}

VecGF VecGF::operator*(scalar c) const {
  const Field& F = *f_;
  VecGF r(f_, v_.size());
  for (size_t i = 0; i < v_.size(); ++i) r.v_[i] = F.mul(v_[i], c);
  return r;
}

std::string VecGF::to_text() const {
  std::ostringstream os;
  for (size_t i = 0; i < v_.size(); ++i) {
    if (i) os << ' ';
    os << v_[i];
  }
  return os.str();
}

VecGF VecGF::from_text(FieldPtr f, const std::string& text) {
  std::istringstream is(text);
  std::vector<scalar> v;
  u64 x;
  while (is >> x) {
    if (x >= f->q()) throw ClnError("vector: entry out of range");
    v.push_back((scalar)x);
  }
  return VecGF(std::move(f), std::move(v));
}

MatGF MatGF::identity(FieldPtr f, unsigned n) {
  MatGF m(std::move(f), n, n);
  for (unsigned i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

MatGF MatGF::companion(const PolyGF& f) {
  if (!f.is_monic() || f.degree() < 1)
    throw ClnError("companion: needs a monic polynomial of degree >= 1");
  const Field& F = *f.field();
  unsigned n = (unsigned)f.degree();
  MatGF m(f.field(), n, n);
  for (unsigned i = 1; i < n; ++i) m.at(i, i - 1) = 1;
  for (unsigned i = 0; i < n; ++i) m.at(i, n - 1) = F.neg(f.coeff(i));
  return m;
}

MatGF MatGF::operator+(const MatGF& o) const {
  const Field& F = *f_;
  MatGF r(f_, rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = F.add(a_[i], o.a_[i]);
  return r;
}

MatGF MatGF::operator-(const MatGF& o) const {
  const Field& F = *f_;
  MatGF r(f_, rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = F.sub(a_[i], o.a_[i]);
  return r;
}

MatGF MatGF::operator*(const MatGF& o) const {
  if (cols_ != o.rows_) throw ClnError("matrix: shape mismatch in product");
  const Field& F = *f_;
  MatGF r(f_, rows_, o.cols_);
  for (unsigned i = 0; i < rows_; ++i) {
    for (unsigned k = 0; k < cols_; ++k) {
      scalar aik = at(i, k);
      if (aik == 0) continue;
      const scalar* brow = &o.a_[(size_t)k * o.cols_];
      scalar* rrow = &r.a_[(size_t)i * o.cols_];
      for (unsigned j = 0; j < o.cols_; ++j)
        rrow[j] = F.add(rrow[j], F.mul(aik, brow[j]));
    }
  }
  return r;
}

VecGF MatGF::operator*(const VecGF& v) const {
  if (cols_ != v.size()) throw ClnError("matrix: shape mismatch in apply");
  const Field& F = *f_;
  VecGF r(f_, rows_);
  for (unsigned i = 0; i < rows_; ++i) {
    scalar acc = 0;
    const scalar* arow = &a_[(size_t)i * cols_];
    for (unsigned j = 0; j < cols_; ++j) acc = F.add(acc, F.mul(arow[j], v[j]));
    r[i] = acc;
  }
  return r;
}

MatGF MatGF::transpose() const {
  MatGF r(f_, cols_, rows_);
  for (unsigned i = 0; i < rows_; ++i)
    for (unsigned j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

MatGF MatGF::theta_entrywise() const {
  const Field& F = *f_;
  MatGF r(f_, rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = F.theta(a_[i]);
  return r;
}

bool MatGF::is_identity() const {
  if (rows_ != cols_) return false;
  for (unsigned i = 0; i < rows_; ++i)
    for (unsigned j = 0; j < cols_; ++j)
      if (at(i, j) != (i == j ? 1u : 0u)) return false;
  return true;
}

VecGF MatGF::row(unsigned i) const {
  VecGF v(f_, cols_);
  for (unsigned j = 0; j < cols_; ++j) v[j] = at(i, j);
  return v;
}

VecGF MatGF::col(unsigned j) const {
  VecGF v(f_, rows_);
  for (unsigned i = 0; i < rows_; ++i) v[i] = at(i, j);
  return v;
}

void MatGF::set_row(unsigned i, const VecGF& v) {
  for (unsigned j = 0; j < cols_; ++j) at(i, j) = v[j];
}

void MatGF::set_col(unsigned j, const VecGF& v) {
  for (unsigned i = 0; i < rows_; ++i) at(i, j) = v[i];
}

void MatGF::paste(const MatGF& b, unsigned i0, unsigned j0) {
  for (unsigned i = 0; i < b.rows_; ++i)
    for (unsigned j = 0; j < b.cols_; ++j) at(i0 + i, j0 + j) = b.at(i, j);
}

std::string MatGF::to_text() const {
  std::ostringstream os;
  for (unsigned i = 0; i < rows_; ++i) {
    for (unsigned j = 0; j < cols_; ++j) {
      if (j) os << ' ';
      os << at(i, j);
    }
    os << '\n';
  }
  return os.str();
}

MatGF MatGF::from_text(FieldPtr f, const std::string& text) {
  std::istringstream is(text);
  std::vector<std::vector<scalar>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<scalar> row;
    u64 x;
    while (ls >> x) {
      if (x >= f->q()) throw ClnError("matrix: entry out of range");
      row.push_back((scalar)x);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ClnError("matrix: empty text");
  MatGF m(f, (unsigned)rows.size(), (unsigned)rows[0].size());
  for (unsigned i = 0; i < m.rows(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw ClnError("matrix: ragged rows");
    for (unsigned j = 0; j < m.cols(); ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

namespace {

// In-place row echelon; returns rank. When inv != nullptr the same row ops
// are mirrored there (must start as identity) and full pivot normalization
// plus back-substitution is applied.
unsigned echelon(MatGF& m, MatGF* mirror, bool reduce) {
  const Field& F = *m.field();
  unsigned rank = 0;
  unsigned rows = m.rows(), cols = m.cols();
  for (unsigned col = 0; col < cols && rank < rows; ++col) {
    unsigned piv = rows;
    for (unsigned i = rank; i < rows; ++i)
      if (m.at(i, col) != 0) {
        piv = i;
        break;
      }
    if (piv == rows) continue;
    if (piv != rank) {
      for (unsigned j = 0; j < cols; ++j)
        std::swap(m.at(piv, j), m.at(rank, j));
      if (mirror)
        for (unsigned j = 0; j < mirror->cols(); ++j)
          std::swap(mirror->at(piv, j), mirror->at(rank, j));
    }
    scalar inv_p = F.inv(m.at(rank, col));
    if (inv_p != 1) {
      for (unsigned j = 0; j < cols; ++j)
        m.at(rank, j) = F.mul(m.at(rank, j), inv_p);
      if (mirror)
        for (unsigned j = 0; j < mirror->cols(); ++j)
          mirror->at(rank, j) = F.mul(mirror->at(rank, j), inv_p);
    }
    unsigned start = reduce ? 0 : rank + 1;
    for (unsigned i = start; i < rows; ++i) {
      if (i == rank) continue;
      scalar c = m.at(i, col);
      if (c == 0) continue;
      for (unsigned j = 0; j < cols; ++j)
        m.at(i, j) = F.sub(m.at(i, j), F.mul(c, m.at(rank, j)));
      if (mirror)
        for (unsigned j = 0; j < mirror->cols(); ++j)
          mirror->at(i, j) = F.sub(mirror->at(i, j), F.mul(c, mirror->at(rank, j)));
    }
    ++rank;
  }
  return rank;
}

}  // namespace

unsigned rank(const MatGF& a) {
  MatGF m = a;
  return echelon(m, nullptr, false);
}

std::optional<MatGF> try_inverse(const MatGF& a) {
  if (a.rows() != a.cols()) throw ClnError("inverse: non-square");
  MatGF m = a;
  MatGF inv = MatGF::identity(a.field(), a.rows());
  unsigned r = echelon(m, &inv, true);
  if (r != a.rows()) return std::nullopt;
  return inv;
}

MatGF inverse(const MatGF& a) {
  auto r = try_inverse(a);
  if (!r) throw ClnError("inverse: singular matrix");
  return *r;
}

scalar determinant(const MatGF& a) {
  if (a.rows() != a.cols()) throw ClnError("determinant: non-square");
  const Field& F = *a.field();
  MatGF m = a;
  unsigned n = m.rows();
  scalar det = 1;
  for (unsigned col = 0; col < n; ++col) {
    unsigned piv = n;
    for (unsigned i = col; i < n; ++i)
      if (m.at(i, col) != 0) {
        piv = i;
        break;
      }
    if (piv == n) return 0;
    if (piv != col) {
      for (unsigned j = 0; j < n; ++j) std::swap(m.at(piv, j), m.at(col, j));
      det = F.neg(det);
    }
    det = F.mul(det, m.at(col, col));
    scalar inv_p = F.inv(m.at(col, col));
    for (unsigned i = col + 1; i < n; ++i) {
      scalar c = F.mul(m.at(i, col), inv_p);
      if (c == 0) continue;
      for (unsigned j = col; j < n; ++j)
        m.at(i, j) = F.sub(m.at(i, j), F.mul(c, m.at(col, j)));
    }
  }
  return det;
}

MatGF mat_pow(const MatGF& a, u64 e) {
  if (a.rows() != a.cols()) throw ClnError("mat_pow: non-square");
  MatGF result = MatGF::identity(a.field(), a.rows());
  MatGF base = a;
  while (e) {
    if (e & 1) result = result * base;
    base = base * base;
    e >>= 1;
  }
  return result;
}

AffineSolution solve_affine(const MatGF& a, const VecGF& b) {
  if (a.rows() != b.size()) throw ClnError("solve_affine: shape mismatch");
  const Field& F = *a.field();
  unsigned rows = a.rows(), cols = a.cols();
  // augmented system
  MatGF m(a.field(), rows, cols + 1);
  for (unsigned i = 0; i < rows; ++i) {
    for (unsigned j = 0; j < cols; ++j) m.at(i, j) = a.at(i, j);
    m.at(i, cols) = b[i];
  }
  echelon(m, nullptr, true);
  // locate pivots
  std::vector<int> pivot_of_row(rows, -1);
  std::vector<int> pivot_row_of_col(cols, -1);
  for (unsigned i = 0; i < rows; ++i) {
    for (unsigned j = 0; j < cols + 1; ++j) {
      if (m.at(i, j) != 0) {
        pivot_of_row[i] = (int)j;
        if (j < cols) pivot_row_of_col[j] = (int)i;
        break;
      }
    }
  }
  AffineSolution sol;
  for (unsigned i = 0; i < rows; ++i)
    if (pivot_of_row[i] == (int)cols) return sol;  // 0 = nonzero: empty set
  sol.solvable = true;
  VecGF part(a.field(), cols);
  for (unsigned j = 0; j < cols; ++j) {
    int r = pivot_row_of_col[j];
    if (r >= 0) part[j] = m.at((unsigned)r, cols);
  }
  sol.particular = part;
  for (unsigned j = 0; j < cols; ++j) {
    if (pivot_row_of_col[j] >= 0) continue;
    VecGF k(a.field(), cols);
    k[j] = 1;
    for (unsigned jj = 0; jj < cols; ++jj) {
      int r = pivot_row_of_col[jj];
      if (r >= 0) k[jj] = F.neg(m.at((unsigned)r, j));
    }
    sol.kernel.push_back(std::move(k));
  }
  return sol;
}

PolyGF char_poly(const MatGF& a) {
  if (a.rows() != a.cols()) throw ClnError("char_poly: non-square");
  const Field& F = *a.field();
  const FieldPtr& fp = a.field();
  unsigned n = a.rows();
  if (n == 0) return PolyGF::constant(fp, 1);
  MatGF h = a;
  // similarity reduction to upper Hessenberg form
  for (unsigned col = 0; col + 2 < n; ++col) {
    unsigned piv = n;
    for (unsigned i = col + 1; i < n; ++i)
      if (h.at(i, col) != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    if (piv != col + 1) {
      for (unsigned j = 0; j < n; ++j)
        std::swap(h.at(piv, j), h.at(col + 1, j));
      for (unsigned i = 0; i < n; ++i)
        std::swap(h.at(i, piv), h.at(i, col + 1));
    }
    scalar pinv = F.inv(h.at(col + 1, col));
    for (unsigned i = col + 2; i < n; ++i) {
      scalar c = F.mul(h.at(i, col), pinv);
      if (c == 0) continue;
      // row_i -= c * row_{col+1};  col_{col+1} += c * col_i
      for (unsigned j = 0; j < n; ++j)
        h.at(i, j) = F.sub(h.at(i, j), F.mul(c, h.at(col + 1, j)));
      for (unsigned i2 = 0; i2 < n; ++i2)
        h.at(i2, col + 1) = F.add(h.at(i2, col + 1), F.mul(c, h.at(i2, i)));
    }
  }
  // recurrence on leading principal minors of (tI - H)
  std::vector<PolyGF> p(n + 1);
  p[0] = PolyGF::constant(fp, 1);
  for (unsigned k = 1; k <= n; ++k) {
    PolyGF t_minus(fp, {F.neg(h.at(k - 1, k - 1)), 1});
    p[k] = t_minus * p[k - 1];
    scalar sub_prod = 1;
    for (unsigned m = 1; m < k; ++m) {
      // product of subdiagonal entries h[k-i+1][k-i], i = 1..m (1-indexed)
      sub_prod = F.mul(sub_prod, h.at(k - m, k - m - 1));
      if (sub_prod == 0) break;
      scalar coef = F.mul(h.at(k - m - 1, k - 1), sub_prod);
      if (coef == 0) continue;
      p[k] = p[k] - p[k - m - 1] * coef;
    }
  }
  return p[n];
}

MatGF poly_at_matrix(const PolyGF& f, const MatGF& a) {
  const Field& F = *a.field();
  unsigned n = a.rows();
  MatGF acc = MatGF::zero(a.field(), n, n);
  for (size_t i = f.coeffs().size(); i-- > 0;) {
    acc = acc * a;
    scalar c = f.coeffs()[i];
    if (c != 0)
      for (unsigned d = 0; d < n; ++d) acc.at(d, d) = F.add(acc.at(d, d), c);
  }
  return acc;
}

unsigned degree_of(const MatGF& g) {
  if (g.rows() != g.cols()) throw ClnError("degree_of: non-square");
  if (rank(g) != g.rows()) throw ClnError("degree_of: singular input");
  return rank(g - MatGF::identity(g.field(), g.rows()));
}

unsigned support_of(const MatGF& g) {
  if (g.rows() != g.cols()) throw ClnError("support_of: non-square");
  unsigned n = g.rows();
  if (rank(g) != n) throw ClnError("support_of: singular input");
  // For a root lambda of an irreducible degree-d factor f of the
  // characteristic polynomial, dim of the lambda-eigenspace over the closure
  // equals dim_Fq ker f(g) / d.
  auto factors = factor_poly(char_poly(g));
  unsigned best = 0;
  for (const auto& pf : factors) {
    unsigned d = (unsigned)pf.factor.degree();
    unsigned kdim = n - rank(poly_at_matrix(pf.factor, g));
    best = std::max(best, kdim / d);
  }
  return n - best;
}

u64 element_order(const MatGF& g) {
  if (g.rows() != g.cols()) throw ClnError("element_order: non-square");
  const Field& F = *g.field();
  unsigned n = g.rows();
  if (rank(g) != n) throw ClnError("element_order: singular input");
  if (g.is_identity()) return 1;
  // The order divides lcm over irreducible factors f^m of char poly of
  // (q^deg(f) - 1) * p^ceil(log_p m).
  auto factors = factor_poly(char_poly(g));
  u64 bound = 1;
  for (const auto& pf : factors) {
    u128 qe = ipow128(F.q(), (unsigned)pf.factor.degree());
    if (qe > ((u128)1 << 62)) throw ClnError("element_order: order too large");
    u64 part = (u64)qe - 1;
    u64 pk = 1;
    while (pk < pf.mult) pk *= F.p();
    if (part == 0) part = 1;
    u64 g1 = gcd_u64(bound, part);
    if ((u128)(bound / g1) * part > ((u128)1 << 62))
      throw ClnError("element_order: order too large");
    bound = bound / g1 * part;
    u64 g2 = gcd_u64(bound, pk);
    bound = bound / g2 * pk;
  }
  u64 ord = bound;
  for (auto& [pr, _] : factorize_u64(bound)) {
    while (ord % pr == 0 && mat_pow(g, ord / pr).is_identity()) ord /= pr;
  }
  return ord;
}

u64 centralizer_order_brute(const MatGF& g, const std::vector<MatGF>& group) {
  u64 count = 0;
  for (const auto& h : group)
    if (g * h == h * g) ++count;
  return count;
}

SpanGF::SpanGF(FieldPtr f, unsigned n, bool track_coords)
    : f_(std::move(f)), n_(n), track_(track_coords) {}

void SpanGF::reset() {
  rows_.clear();
  expr_.clear();
  pivots_.clear();
  inserts_ = 0;
}

bool SpanGF::contains(const std::vector<scalar>& v) const {
  const Field& F = *f_;
  std::vector<scalar> w = v;
  for (size_t r = 0; r < rows_.size(); ++r) {
    scalar c = w[pivots_[r]];
    if (c == 0) continue;
    const auto& row = rows_[r];
    for (unsigned j = 0; j < n_; ++j) w[j] = F.sub(w[j], F.mul(c, row[j]));
  }
  for (scalar c : w)
    if (c != 0) return false;
  return true;
}

bool SpanGF::insert(const std::vector<scalar>& v) {
  const Field& F = *f_;
  std::vector<scalar> w = v;
  std::vector<scalar> e;
  if (track_) {
    e.assign(inserts_ + 1, 0);
    e[inserts_] = 1;
  }
  for (size_t r = 0; r < rows_.size(); ++r) {
    scalar c = w[pivots_[r]];
    if (c == 0) continue;
    const auto& row = rows_[r];
    for (unsigned j = 0; j < n_; ++j) w[j] = F.sub(w[j], F.mul(c, row[j]));
    if (track_) {
      const auto& ex = expr_[r];
      for (size_t j = 0; j < ex.size(); ++j) e[j] = F.sub(e[j], F.mul(c, ex[j]));
    }
  }
  ++inserts_;
  unsigned piv = n_;
  for (unsigned j = 0; j < n_; ++j)
    if (w[j] != 0) {
      piv = j;
      break;
    }
  if (piv == n_) return false;
  scalar ci = F.inv(w[piv]);
  for (unsigned j = 0; j < n_; ++j) w[j] = F.mul(w[j], ci);
  if (track_) {
    for (auto& c : e) c = F.mul(c, ci);
    e.resize(inserts_, 0);
    expr_.push_back(std::move(e));
  }
  rows_.push_back(std::move(w));
  pivots_.push_back(piv);
  return true;
}

std::vector<scalar> SpanGF::coords(const std::vector<scalar>& v) const {
  if (!track_) throw ClnError("span: coordinate tracking disabled");
  const Field& F = *f_;
  std::vector<scalar> w = v;
  std::vector<scalar> out(inserts_, 0);
  for (size_t r = 0; r < rows_.size(); ++r) {
    scalar c = w[pivots_[r]];
    if (c == 0) continue;
    const auto& row = rows_[r];
    for (unsigned j = 0; j < n_; ++j) w[j] = F.sub(w[j], F.mul(c, row[j]));
    const auto& ex = expr_[r];
    for (size_t j = 0; j < ex.size(); ++j)
      out[j] = F.add(out[j], F.mul(c, ex[j]));
  }
  for (scalar c : w)
    if (c != 0) throw ClnError("span: coords of vector outside span");
  return out;
}

BitMat::BitMat(unsigned rows, unsigned cols) : rows_(rows), cols_(cols) {
  if (cols > 64) throw ClnError("bitmat: more than 64 columns");
  r_.assign(rows, 0);
}

BitMat BitMat::identity(unsigned n) {
  BitMat m(n, n);
  for (unsigned i = 0; i < n; ++i) m.r_[i] = 1ULL << i;
  return m;
}

BitMat BitMat::from_mat(const MatGF& a) {
  if (a.field()->q() != 2) throw ClnError("bitmat: field is not GF(2)");
  BitMat m(a.rows(), a.cols());
  for (unsigned i = 0; i < a.rows(); ++i)
    for (unsigned j = 0; j < a.cols(); ++j)
      if (a.at(i, j)) m.r_[i] |= 1ULL << j;
  return m;
}

MatGF BitMat::to_mat(const FieldPtr& f2) const {
  MatGF a(f2, rows_, cols_);
  for (unsigned i = 0; i < rows_; ++i)
    for (unsigned j = 0; j < cols_; ++j) a.at(i, j) = get(i, j) ? 1 : 0;
  return a;
}

BitMat BitMat::operator*(const BitMat& o) const {
  BitMat r(rows_, o.cols_);
  // r[i] = xor over set bits k of row i of o.row(k)
  for (unsigned i = 0; i < rows_; ++i) {
    u64 acc = 0, bits = r_[i];
    while (bits) {
      unsigned k = (unsigned)__builtin_ctzll(bits);
      bits &= bits - 1;
      acc ^= o.r_[k];
    }
    r.r_[i] = acc;
  }
  return r;
}

u64 BitMat::apply(u64 v) const {
  // matrix times column vector: bit i of result = parity(row_i & v)
  u64 out = 0;
  for (unsigned i = 0; i < rows_; ++i)
    out |= (u64)(__builtin_popcountll(r_[i] & v) & 1) << i;
  return out;
}

BitMat BitMat::transpose() const {
  BitMat r(cols_, rows_);
  for (unsigned i = 0; i < rows_; ++i) {
    u64 bits = r_[i];
    while (bits) {
      unsigned j = (unsigned)__builtin_ctzll(bits);
      bits &= bits - 1;
      r.r_[j] |= 1ULL << i;
    }
  }
  return r;
}

BitMat BitMat::add(const BitMat& o) const {
  BitMat r = *this;
  for (unsigned i = 0; i < rows_; ++i) r.r_[i] ^= o.r_[i];
  return r;
}

unsigned BitMat::rank() const {
  std::vector<u64> rows = r_;
  unsigned rank = 0;
  for (unsigned col = 0; col < cols_ && rank < rows_; ++col) {
    u64 mask = 1ULL << col;
    unsigned piv = rows_;
    for (unsigned i = rank; i < rows_; ++i)
      if (rows[i] & mask) {
        piv = i;
        break;
      }
    if (piv == rows_) continue;
    std::swap(rows[piv], rows[rank]);
    for (unsigned i = 0; i < rows_; ++i)
      if (i != rank && (rows[i] & mask)) rows[i] ^= rows[rank];
    ++rank;
  }
  return rank;
}

std::optional<BitMat> BitMat::try_inverse() const {
  if (rows_ != cols_) throw ClnError("bitmat: inverse of non-square");
  std::vector<u64> m = r_, inv(rows_);
  for (unsigned i = 0; i < rows_; ++i) inv[i] = 1ULL << i;
  for (unsigned col = 0; col < cols_; ++col) {
    u64 mask = 1ULL << col;
    unsigned piv = rows_;
    for (unsigned i = col; i < rows_; ++i)
      if (m[i] & mask) {
        piv = i;
        break;
      }
    if (piv == rows_) return std::nullopt;
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    for (unsigned i = 0; i < rows_; ++i) {
      if (i != col && (m[i] & mask)) {
        m[i] ^= m[col];
        inv[i] ^= inv[col];
      }
    }
  }
  BitMat r(rows_, cols_);
  r.r_ = inv;
  return r;
}

BitMat BitMat::pow(u64 e) const {
  BitMat result = BitMat::identity(rows_);
  BitMat base = *this;
  while (e) {
    if (e & 1) result = result * base;
    base = base * base;
    e >>= 1;
  }
  return result;
}

bool BitMat::is_identity() const {
  if (rows_ != cols_) return false;
  for (unsigned i = 0; i < rows_; ++i)
    if (r_[i] != (1ULL << i)) return false;
  return true;
}

}  // namespace cln
