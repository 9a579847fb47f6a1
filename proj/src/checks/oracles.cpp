#include "checks/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mimovlc::oracle {

Svd jacobi_svd(const Eigen::MatrixXd& a)
{
    const auto m = a.rows();
    const auto n = a.cols();
    // Work on the taller orientation so columns are orthogonalized.
    const bool flip = m < n;
    Eigen::MatrixXd w = flip ? Eigen::MatrixXd(a.transpose()) : a;
    const auto rows = w.rows();
    const auto cols = w.cols();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(cols, cols);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < cols; ++p)
            for (Eigen::Index q = p + 1; q < cols; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (Eigen::Index i = 0; i < rows; ++i) {
                    alpha += w(i, p) * w(i, p);
                    beta += w(i, q) * w(i, q);
                    gamma += w(i, p) * w(i, q);
                }
                if (std::abs(gamma) <= 1e-300)
                    continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta + 1e-300));
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (Eigen::Index i = 0; i < cols; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        if (off < 1e-15)
            break;
    }

    std::vector<double> s(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i)
            acc += w(i, j) * w(i, j);
        s[j] = std::sqrt(acc);
    }
    std::vector<Eigen::Index> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return s[x] > s[y]; });

    Svd out;
    out.u.setZero(rows, cols);
    out.v.setZero(cols, cols);
    for (Eigen::Index k = 0; k < cols; ++k) {
        const auto j = order[k];
        out.s.push_back(s[j]);
        out.v.col(k) = v.col(j);
        if (s[j] > 0.0)
            out.u.col(k) = w.col(j) / s[j];
    }
    if (flip)
        std::swap(out.u, out.v);
    return out;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, double rel_floor)
{
    const Svd d = jacobi_svd(a);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(a.cols(), a.rows());
    const double floor = d.s.empty() ? 0.0 : rel_floor * d.s.front();
    for (std::size_t k = 0; k < d.s.size(); ++k)
        if (d.s[k] > floor && d.s[k] > 0.0)
            for (Eigen::Index i = 0; i < p.rows(); ++i)
                for (Eigen::Index j = 0; j < p.cols(); ++j)
                    p(i, j) += d.v(i, k) * d.u(j, k) / d.s[k];
    return p;
}

std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd a)
{
    const auto n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (off < 1e-30)
            break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double kp = a(k, p), kq = a(k, q);
                    a(k, p) = c * kp - s * kq;
                    a(k, q) = s * kp + c * kq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double pk = a(p, k), qk = a(q, k);
                    a(p, k) = c * pk - s * qk;
                    a(q, k) = s * pk + c * qk;
                }
            }
    }
    std::vector<double> ev(n);
    for (Eigen::Index i = 0; i < n; ++i)
        ev[i] = a(i, i);
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

double laplace_det(const Eigen::MatrixXd& a)
{
    const auto n = a.rows();
    if (n == 1)
        return a(0, 0);
    double det = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::MatrixXd minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r)
            for (Eigen::Index c = 0, cc = 0; c < n; ++c)
                if (c != j)
                    minor(r - 1, cc++) = a(r, c);
        det += (j % 2 ? -1.0 : 1.0) * a(0, j) * laplace_det(minor);
    }
    return det;
}

unsigned nearest_label(std::span<const cplx> points, cplx r)
{
    unsigned best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (unsigned i = 0; i < points.size(); ++i) {
        const double d = std::norm(r - points[i]);
        if (d < best_d - 1e-12) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<cplx> gray_qam(int order)
{
    const int side = static_cast<int>(std::lround(std::sqrt(order)));
    const int half_bits = static_cast<int>(std::lround(std::log2(side)));
    double energy = 0.0;
    for (int i = 0; i < side; ++i)
        for (int q = 0; q < side; ++q) {
            const double x = side - 1 - 2 * i;
            const double y = side - 1 - 2 * q;
            energy += (x * x + y * y) / order;
        }
    const double scale = 1.0 / std::sqrt(energy);
    std::vector<cplx> pts(order);
    for (int i = 0; i < side; ++i)
        for (int q = 0; q < side; ++q) {
            const unsigned gi = static_cast<unsigned>(i ^ (i >> 1));
            const unsigned gq = static_cast<unsigned>(q ^ (q >> 1));
            pts[(gi << half_bits) | gq] = scale * cplx(side - 1 - 2 * i, side - 1 - 2 * q);
        }
    return pts;
}

std::vector<unsigned> ml_vector(const Eigen::MatrixXd& h, std::span<const cplx> y, std::span<const cplx> points)
{
    const auto nt = static_cast<std::size_t>(h.cols());
    std::vector<unsigned> idx(nt, 0), best(nt, 0);
    double best_d = std::numeric_limits<double>::infinity();
    for (;;) {
        double d = 0.0;
        for (Eigen::Index n = 0; n < h.rows(); ++n) {
            cplx acc = y[n];
            for (std::size_t m = 0; m < nt; ++m)
                acc -= h(n, static_cast<Eigen::Index>(m)) * points[idx[m]];
            d += std::norm(acc);
        }
        if (d < best_d) {
            best_d = d;
            best = idx;
        }
        std::size_t k = 0;
        while (k < nt && ++idx[k] == points.size())
            idx[k++] = 0;
        if (k == nt)
            break;
    }
    return best;
}

} // namespace mimovlc::oracle
