#include "mfpred/infotheory.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace mfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// psi(n) for n = 0..max_n; entry 0 is unused.
const std::vector<double>& digamma_table(int max_n) {
    thread_local std::vector<double> table{0.0};
    if (static_cast<int>(table.size()) <= max_n) {
        const int from = static_cast<int>(table.size());
        table.resize(static_cast<std::size_t>(max_n) + 1);
        for (int n = from; n <= max_n; ++n) table[n] = boost::math::digamma(static_cast<double>(n));
    }
    return table;
}

void check_block(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* label) {
    if (!m.allFinite()) throw DataError(std::string("non-finite value in ") + label);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m.col(c).minCoeff() == m.col(c).maxCoeff())
            throw DegenerateInputError(std::string("zero-variance column in ") + label +
                                       " (all distances along it vanish)");
    }
}

// Column-major copy; column c of block b lives at data[(offset_b + c) * S].
struct Sample {
    std::vector<double> data;
    int n = 0;
    int dx = 0, dy = 0, dz = 0;

    const double* col(int c) const { return data.data() + static_cast<std::size_t>(c) * n; }
};

Sample pack(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
            const Eigen::Ref<const Eigen::MatrixXd>& z) {
    Sample s;
    s.n = static_cast<int>(x.rows());
    s.dx = static_cast<int>(x.cols());
    s.dy = static_cast<int>(y.cols());
    s.dz = static_cast<int>(z.cols());
    s.data.resize(static_cast<std::size_t>(s.n) * (s.dx + s.dy + s.dz));
    int c = 0;
    for (const auto* block : {&x, &y, &z}) {
        for (Eigen::Index j = 0; j < block->cols(); ++j, ++c) {
            double* dst = s.data.data() + static_cast<std::size_t>(c) * s.n;
            for (int r = 0; r < s.n; ++r) dst[r] = (*block)(r, j);
        }
    }
    return s;
}

// One column sorted ascending, with the original row of every entry.
struct SortedColumn {
    std::vector<double> values;
    std::vector<int> rows;

    SortedColumn(const double* col, int n) : rows(static_cast<std::size_t>(n)) {
        std::iota(rows.begin(), rows.end(), 0);
        std::stable_sort(rows.begin(), rows.end(), [col](int a, int b) { return col[a] < col[b]; });
        values.resize(rows.size());
        for (int r = 0; r < n; ++r) values[r] = col[rows[r]];
    }

    // Index range that contains every entry v with |v - a| < eps.
    std::pair<int, int> window(double a, double eps) const {
        const double slack = 1e-9 * (1.0 + std::abs(a) + eps);
        const auto lo = std::lower_bound(values.begin(), values.end(), a - eps - slack);
        const auto hi = std::upper_bound(lo, values.end(), a + eps + slack);
        return {static_cast<int>(lo - values.begin()), static_cast<int>(hi - values.begin())};
    }
};

// dist[j] = max over columns [first, first + count) of |col[j] - col[i]|.
void block_distances(const Sample& s, int first, int count, int i, double* dist) {
    const int n = s.n;
    std::fill(dist, dist + n, 0.0);
    for (int c = first; c < first + count; ++c) {
        const double* col = s.col(c);
        const double ci = col[i];
        for (int j = 0; j < n; ++j) {
            const double d = std::abs(col[j] - ci);
            dist[j] = d > dist[j] ? d : dist[j];
        }
    }
}

// Max-norm distance between rows i and j over columns [first, first + count).
double block_distance(const Sample& s, int first, int count, int i, int j) {
    double d = 0.0;
    for (int c = first; c < first + count; ++c) {
        const double* col = s.col(c);
        const double v = std::abs(col[j] - col[i]);
        d = v > d ? v : d;
    }
    return d;
}

// Distance to the k-th nearest other point in the joint space. Points are
// visited outward in the order of column 0; the scan stops once the gap along
// column 0 alone reaches the current k-th distance.
double kth_distance(const Sample& s, const SortedColumn& order, const std::vector<int>& rank, int i, int k,
                    std::vector<double>& heap) {
    const int n = s.n;
    const int d = s.dx + s.dy + s.dz;
    const double* c0 = s.col(0);
    const double a = c0[i];
    heap.clear();
    auto offer = [&](int j) {
        const bool full = static_cast<int>(heap.size()) == k;
        const double bound = full ? heap.front() : kInf;
        double dist = 0.0;
        for (int c = 0; c < d && dist < bound; ++c) {
            const double* col = s.col(c);
            const double v = std::abs(col[j] - col[i]);
            dist = v > dist ? v : dist;
        }
        if (dist >= bound) return;
        if (full) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = dist;
        } else {
            heap.push_back(dist);
        }
        std::push_heap(heap.begin(), heap.end());
    };
    int left = rank[i] - 1, right = rank[i] + 1;
    while (left >= 0 || right < n) {
        const bool full = static_cast<int>(heap.size()) == k;
        const double bound = full ? heap.front() : kInf;
        const double gl = left >= 0 ? std::abs(order.values[left] - a) : kInf;
        const double gr = right < n ? std::abs(order.values[right] - a) : kInf;
        if (std::min(gl, gr) >= bound) break;
        if (gl <= gr) {
            offer(order.rows[left--]);
        } else {
            offer(order.rows[right++]);
        }
    }
    return heap.front();
}

// Below this sample size comparing all pairs beats the sorted-projection search.
constexpr int kScanThreshold = 2000;

// Per-point digamma terms from all pairwise distances. Returns the number of
// points whose k-th neighbor distance is zero.
int exhaustive_terms(const Sample& s, int k, const std::vector<double>& psi, std::vector<double>& terms) {
    const int n = s.n;
    const bool conditional = s.dz > 0;
    int repeated = 0;
    std::vector<double> dx(n), dy(n), dz(n), joint(n);
    for (int i = 0; i < n; ++i) {
        block_distances(s, 0, s.dx, i, dx.data());
        block_distances(s, s.dx, s.dy, i, dy.data());
        if (conditional) block_distances(s, s.dx + s.dy, s.dz, i, dz.data());
        for (int j = 0; j < n; ++j) {
            double d = dx[j] > dy[j] ? dx[j] : dy[j];
            if (conditional) d = dz[j] > d ? dz[j] : d;
            joint[j] = d;
        }
        dx[i] = dy[i] = dz[i] = kInf;
        joint[i] = kInf;
        std::nth_element(joint.begin(), joint.begin() + (k - 1), joint.end());
        const double eps = joint[k - 1];
        if (eps == 0.0) ++repeated;

        if (!conditional) {
            int nx = 0, ny = 0;
            for (int j = 0; j < n; ++j) {
                nx += dx[j] < eps;
                ny += dy[j] < eps;
            }
            terms[i] = psi[nx + 1] + psi[ny + 1];
        } else {
            int nz = 0, nxz = 0, nyz = 0;
            for (int j = 0; j < n; ++j) {
                const bool in_z = dz[j] < eps;
                nz += in_z;
                nxz += in_z && dx[j] < eps;
                nyz += in_z && dy[j] < eps;
            }
            terms[i] = psi[nz + 1] - (psi[nxz + 1] + psi[nyz + 1]);
        }
    }
    return repeated;
}

// Same terms from neighbor searches along sorted first columns of each block.
int projected_terms(const Sample& s, int k, const std::vector<double>& psi, std::vector<double>& terms) {
    const int n = s.n;
    const bool conditional = s.dz > 0;
    const int x0 = 0, y0 = s.dx, z0 = s.dx + s.dy;
    const SortedColumn by_x(s.col(x0), n);
    const SortedColumn by_y(s.col(y0), n);
    const std::optional<SortedColumn> by_z =
        conditional ? std::optional<SortedColumn>(SortedColumn(s.col(z0), n)) : std::nullopt;
    std::vector<int> rank(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) rank[by_x.rows[r]] = r;

    std::vector<double> heap;
    heap.reserve(static_cast<std::size_t>(k));
    int repeated = 0;

    // Points j != i within eps of i on block [first, first + count), scanning
    // the window of `order`, which sorts the block's first column.
    auto marginal = [&](const SortedColumn& order, int first, int count, int i, double eps) {
        const auto [lo, hi] = order.window(s.col(first)[i], eps);
        int m = 0;
        for (int r = lo; r < hi; ++r) {
            const int j = order.rows[r];
            m += j != i && block_distance(s, first, count, i, j) < eps;
        }
        return m;
    };

    for (int i = 0; i < n; ++i) {
        const double eps = kth_distance(s, by_x, rank, i, k, heap);
        if (eps == 0.0) ++repeated;
        if (!conditional) {
            terms[i] = psi[marginal(by_x, x0, s.dx, i, eps) + 1] + psi[marginal(by_y, y0, s.dy, i, eps) + 1];
            continue;
        }
        const auto [lo, hi] = by_z->window(s.col(z0)[i], eps);
        int nz = 0, nxz = 0, nyz = 0;
        for (int r = lo; r < hi; ++r) {
            const int j = by_z->rows[r];
            if (j == i || block_distance(s, z0, s.dz, i, j) >= eps) continue;
            ++nz;
            nxz += block_distance(s, x0, s.dx, i, j) < eps;
            nyz += block_distance(s, y0, s.dy, i, j) < eps;
        }
        terms[i] = psi[nz + 1] - (psi[nxz + 1] + psi[nyz + 1]);
    }
    return repeated;
}

}  // namespace

CmiEstimate estimate_cmi(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                         const Eigen::Ref<const Eigen::MatrixXd>& z, int k) {
    const auto n_rows = x.rows();
    if (x.cols() < 1 || y.cols() < 1) throw ValidationError("estimate_cmi: X and Y need at least one column");
    if (y.rows() != n_rows || (z.cols() > 0 && z.rows() != n_rows))
        throw ValidationError("estimate_cmi: X, Y and Z must have the same number of rows");
    if (k < 1) throw ValidationError("estimate_cmi: k must be >= 1");
    if (n_rows <= k)
        throw InsufficientSamplesError("estimate_cmi: need more samples (" + std::to_string(n_rows) +
                                       ") than neighbors (" + std::to_string(k) + ")");
    check_block(x, "X");
    check_block(y, "Y");
    check_block(z, "Z");

    const Sample s = pack(x, y, z);
    const int n = s.n;
    const bool conditional = s.dz > 0;
    const auto& psi = digamma_table(n + 1);
    std::vector<double> terms(static_cast<std::size_t>(n));
    const int repeated = n < kScanThreshold ? exhaustive_terms(s, k, psi, terms) : projected_terms(s, k, psi, terms);

    const double mean = std::accumulate(terms.begin(), terms.end(), 0.0) / n;
    CmiEstimate out;
    out.value = conditional ? psi[k] + mean : psi[k] + psi[n] - mean;
    out.k = k;
    out.dims = CmiDims{s.dx, s.dy, s.dz};
    out.n_samples = n;
    out.repeated_points = repeated;
    return out;
}

CmiEstimate estimate_mi(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y, int k) {
    const Eigen::MatrixXd none(x.rows(), 0);
    return estimate_cmi(x, y, none, k);
}

int shuffle_threshold_rank(int surrogates, double alpha) {
    // The epsilon keeps e.g. (1 - 0.05) * 100 from rounding up to 96.
    const int rank = static_cast<int>(std::ceil((1.0 - alpha) * surrogates - 1e-9));
    return std::clamp(rank, 1, surrogates);
}

ShuffleTestResult shuffle_test(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                               const Eigen::Ref<const Eigen::MatrixXd>& z, int k, int surrogates, double alpha,
                               std::uint64_t rng_seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("shuffle_test: alpha must lie in (0, 1)");
    if (surrogates < 20) throw ValidationError("shuffle_test: at least 20 surrogates are required");

    ShuffleTestResult out;
    out.observed = estimate_cmi(x, y, z, k).value;
    out.alpha = alpha;
    out.n_surrogates = surrogates;
    out.surrogates.resize(static_cast<std::size_t>(surrogates));

    const auto n = x.rows();
    Eigen::MatrixXd shuffled(n, x.cols());
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (int m = 0; m < surrogates; ++m) {
        std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                          static_cast<std::uint32_t>(m)};
        std::mt19937_64 rng(seq);
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Eigen::Index r = 0; r < n; ++r) shuffled.row(r) = x.row(perm[static_cast<std::size_t>(r)]);
        out.surrogates[static_cast<std::size_t>(m)] = estimate_cmi(shuffled, y, z, k).value;
    }
    std::sort(out.surrogates.begin(), out.surrogates.end());
    out.threshold = out.surrogates[static_cast<std::size_t>(shuffle_threshold_rank(surrogates, alpha) - 1)];
    out.significant = out.observed > out.threshold;
    return out;
}

}  // namespace mfp
