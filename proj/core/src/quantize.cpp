#include "actrec/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "actrec/errors.hpp"
#include "actrec/rng.hpp"

namespace actrec {

std::pair<int, int> GridQuantizer::cell(double x, double y) const {
    const int ix = static_cast<int>(std::floor((x - origin_x) / cell_width));
    const int iy = static_cast<int>(std::floor((y - origin_y) / cell_height));
    return {ix, iy};
}

int VoronoiQuantizer::cell(double x, double y) const {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        const double dx = x - centroids[i].x;
        const double dy = y - centroids[i].y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {  // strict: ties keep the lowest index
            best_d2 = d2;
            best = static_cast<int>(i);
        }
    }
    return best;
}

namespace {

double sq_dist(const PlanePoint& a, const PlanePoint& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

std::size_t count_distinct(const std::vector<PlanePoint>& points) {
    std::set<std::pair<double, double>> seen;
    for (const auto& p : points) seen.emplace(p.x, p.y);
    return seen.size();
}

}  // namespace

VoronoiQuantizer fit_voronoi(const std::vector<PlanePoint>& points, int k, std::uint64_t seed) {
    if (points.empty()) throw DataError("fit_voronoi: empty point set");
    if (k < 1) throw DataError("fit_voronoi: k must be >= 1");
    const std::size_t distinct = count_distinct(points);
    if (static_cast<std::size_t>(k) > distinct)
        throw DataError("fit_voronoi: k=" + std::to_string(k) + " exceeds " +
                        std::to_string(distinct) + " distinct points");

    const std::size_t n = points.size();
    Rng rng(seed);

    // k-means++ seeding; d2 tracks the squared distance to the nearest chosen
    // centroid so each round costs O(n)
    std::vector<PlanePoint> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(points[rng.next_below(n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centroids.back());
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (double v : d2) total += v;
        // total > 0 is guaranteed while centroids < distinct points
        double u = rng.next_double() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            u -= d2[i];
            if (u < 0.0) {
                pick = i;
                break;
            }
        }
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], sq_dist(points[i], centroids.back()));
    }

    // Lloyd iterations until assignments stabilise
    std::vector<int> assign(n, -1);
    constexpr int kMaxIterations = 100;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < centroids.size(); ++c) {
                const double d = sq_dist(points[i], centroids[c]);
                if (d < best_d2) {
                    best_d2 = d;
                    best = static_cast<int>(c);
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::vector<double> sx(static_cast<std::size_t>(k), 0.0), sy(static_cast<std::size_t>(k), 0.0);
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assign[i]);
            sx[c] += points[i].x;
            sy[c] += points[i].y;
            ++count[c];
        }
        for (int c = 0; c < k; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            if (count[uc] > 0) {
                centroids[uc] = {sx[uc] / count[uc], sy[uc] / count[uc]};
            } else {
                // reseat an emptied cluster at the point farthest from its centroid
                std::size_t far = 0;
                double far_d2 = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(points[i], centroids[static_cast<std::size_t>(assign[i])]);
                    if (d > far_d2) {
                        far_d2 = d;
                        far = i;
                    }
                }
                centroids[uc] = points[far];
            }
        }
    }

    return VoronoiQuantizer{std::move(centroids)};
}

std::vector<int> circular_neighborhood(const CircularQuantizer& q, double cx, double cy,
                                       const std::vector<PlanePoint>& population) {
    std::vector<int> members;
    const double r2 = q.radius * q.radius;
    for (std::size_t i = 0; i < population.size(); ++i) {
        const double dx = population[i].x - cx;
        const double dy = population[i].y - cy;
        if (dx * dx + dy * dy <= r2) members.push_back(static_cast<int>(i));
    }
    return members;
}

RadiusIndex::RadiusIndex(std::vector<PlanePoint> points, double radius)
    : points_(std::move(points)), radius_(radius) {
    if (radius_ <= 0.0) throw DataError("RadiusIndex: radius must be positive");
    inv_bucket_ = 1.0 / radius_;
    std::map<std::int64_t, std::vector<int>> build;
    for (std::size_t i = 0; i < points_.size(); ++i)
        build[bucket_key(points_[i].x, points_[i].y)].push_back(static_cast<int>(i));
    buckets_.assign(build.begin(), build.end());
}

std::int64_t RadiusIndex::bucket_key(double x, double y) const {
    const int bx = static_cast<int>(std::floor(x * inv_bucket_));
    const int by = static_cast<int>(std::floor(y * inv_bucket_));
    return pack_grid_cell(bx, by);
}

std::vector<int> RadiusIndex::query(double x, double y) const {
    std::vector<int> members;
    const double r2 = radius_ * radius_;
    const int bx = static_cast<int>(std::floor(x * inv_bucket_));
    const int by = static_cast<int>(std::floor(y * inv_bucket_));
    for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
            const std::int64_t key = pack_grid_cell(bx + dx, by + dy);
            const auto it = std::lower_bound(
                buckets_.begin(), buckets_.end(), key,
                [](const auto& bucket, std::int64_t k) { return bucket.first < k; });
            if (it == buckets_.end() || it->first != key) continue;
            for (int i : it->second) {
                const double ddx = points_[static_cast<std::size_t>(i)].x - x;
                const double ddy = points_[static_cast<std::size_t>(i)].y - y;
                if (ddx * ddx + ddy * ddy <= r2) members.push_back(i);
            }
        }
    }
    std::sort(members.begin(), members.end());
    return members;
}

std::string_view quantizer_kind_name(QuantizerKind k) {
    switch (k) {
        case QuantizerKind::Grid: return "grid";
        case QuantizerKind::Voronoi: return "voronoi";
        default: return "circular";
    }
}

std::optional<QuantizerKind> quantizer_kind_from_name(std::string_view name) {
    if (name == "grid") return QuantizerKind::Grid;
    if (name == "voronoi") return QuantizerKind::Voronoi;
    if (name == "circular") return QuantizerKind::Circular;
    return std::nullopt;
}

std::int64_t pack_grid_cell(int ix, int iy) {
    return static_cast<std::int64_t>(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
        static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy)));
}

std::pair<int, int> unpack_grid_cell(std::int64_t id) {
    const auto u = static_cast<std::uint64_t>(id);
    return {static_cast<int>(static_cast<std::uint32_t>(u >> 32)),
            static_cast<int>(static_cast<std::uint32_t>(u & 0xffffffffULL))};
}

Quantizer Quantizer::grid(GridQuantizer g) {
    Quantizer q;
    q.kind_ = QuantizerKind::Grid;
    q.grid_ = std::move(g);
    return q;
}

Quantizer Quantizer::voronoi(VoronoiQuantizer v) {
    Quantizer q;
    q.kind_ = QuantizerKind::Voronoi;
    q.voronoi_ = std::move(v);
    return q;
}

Quantizer Quantizer::circular(CircularQuantizer c) {
    Quantizer q;
    q.kind_ = QuantizerKind::Circular;
    q.circular_ = c;
    return q;
}

std::int64_t Quantizer::cell_of(double x, double y) const {
    switch (kind_) {
        case QuantizerKind::Grid: {
            const auto [ix, iy] = grid_.cell(x, y);
            return pack_grid_cell(ix, iy);
        }
        case QuantizerKind::Voronoi:
            return voronoi_.cell(x, y);
        default:
            throw InternalError("cell_of is undefined for the circular quantizer");
    }
}

std::vector<TimeSlot> time_slots(std::int64_t t_start, std::int64_t t_end, int slot_width_minutes,
                                 const StudyCalendar& calendar) {
    if (t_start >= t_end) throw DataError("time_slots: t_start must precede t_end");
    if (slot_width_minutes <= 0 || 1440 % slot_width_minutes != 0)
        throw DataError("time_slots: slot width must divide 1440 minutes");

    const std::int64_t base = calendar.start_epoch_seconds();
    const std::int64_t width_sec = static_cast<std::int64_t>(slot_width_minutes) * 60;
    const std::int64_t half = width_sec / 2;  // width_sec is a multiple of 60, so exact
    auto floor_div = [](std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b;
        if (a % b != 0 && ((a < 0) != (b < 0))) --q;
        return q;
    };
    // each endpoint snaps to the nearest slot boundary, ties toward the
    // earlier slot; t_start < t_end guarantees first <= last
    const std::int64_t first = floor_div(t_start - base - half + width_sec - 1, width_sec);
    const std::int64_t last = floor_div(t_end - base + half + width_sec - 1, width_sec) - 1;
    const int slots_per_day = 1440 / slot_width_minutes;

    std::vector<TimeSlot> out;
    out.reserve(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t s = first; s <= last; ++s) {
        const std::int64_t day = floor_div(s, slots_per_day);
        out.push_back(TimeSlot{static_cast<int>(day),
                               static_cast<int>(s - day * slots_per_day)});
    }
    return out;
}

}  // namespace actrec
