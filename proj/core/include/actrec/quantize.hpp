#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "actrec/domain.hpp"

namespace actrec {

struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

// ---------------------------------------------------------------------------
// Spatial quantizers
// ---------------------------------------------------------------------------

// Fixed rectangular cells, half-open: [x0 + i*w, x0 + (i+1)*w).
struct GridQuantizer {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_width = 800.0;
    double cell_height = 800.0;

    // integer cell coordinates (floor arithmetic, valid for negatives)
    std::pair<int, int> cell(double x, double y) const;
};

// Fixed cells induced by nearest-centroid assignment. Centroids come from
// k-means over training coordinates; point queries against the induced
// Voronoi diagram reduce to a nearest-centroid scan.
struct VoronoiQuantizer {
    std::vector<PlanePoint> centroids;

    // index of the nearest centroid, ties broken by lowest index
    int cell(double x, double y) const;
};

// Dynamic instance-centred cells: every query point is the centre of its own
// cell of the given radius, so with N instances there are N cells.
struct CircularQuantizer {
    double radius = 300.0;
};

// Lloyd's algorithm with k-means++ initialisation, deterministic for a given
// seed. Throws DataError when points are empty or k exceeds the number of
// distinct points.
VoronoiQuantizer fit_voronoi(const std::vector<PlanePoint>& points, int k, std::uint64_t seed);

// All population members within <= radius of the centre (closed ball).
std::vector<int> circular_neighborhood(const CircularQuantizer& q, double cx, double cy,
                                       const std::vector<PlanePoint>& population);

// Uniform-bucket index for repeated radius queries over a fixed point set.
class RadiusIndex {
public:
    RadiusIndex(std::vector<PlanePoint> points, double radius);

    // indices of points within <= radius of (x, y), ascending
    std::vector<int> query(double x, double y) const;
    const std::vector<PlanePoint>& points() const { return points_; }
    double radius() const { return radius_; }

private:
    std::int64_t bucket_key(double x, double y) const;

    std::vector<PlanePoint> points_;
    double radius_ = 0.0;
    double inv_bucket_ = 0.0;
    // bucket key -> point indices; bucket edge length == radius
    std::vector<std::pair<std::int64_t, std::vector<int>>> buckets_;
};

// ---------------------------------------------------------------------------
// Unified quantizer handle
// ---------------------------------------------------------------------------

enum class QuantizerKind : std::uint8_t { Grid = 0, Voronoi = 1, Circular = 2 };

std::string_view quantizer_kind_name(QuantizerKind k);
std::optional<QuantizerKind> quantizer_kind_from_name(std::string_view name);

// Grid cell ids pack the two 32-bit cell coordinates into one opaque id.
std::int64_t pack_grid_cell(int ix, int iy);
std::pair<int, int> unpack_grid_cell(std::int64_t id);

// Value-semantic handle over the three geometries. Fixed kinds (grid,
// Voronoi) map any point to an opaque cell id; the circular kind has no
// static cells and is served by radius queries instead.
class Quantizer {
public:
    static Quantizer grid(GridQuantizer g);
    static Quantizer voronoi(VoronoiQuantizer v);
    static Quantizer circular(CircularQuantizer c);

    QuantizerKind kind() const { return kind_; }
    bool is_fixed() const { return kind_ != QuantizerKind::Circular; }

    // fixed kinds only; throws InternalError for circular
    std::int64_t cell_of(double x, double y) const;

    const GridQuantizer& grid_params() const { return grid_; }
    const VoronoiQuantizer& voronoi_params() const { return voronoi_; }
    const CircularQuantizer& circular_params() const { return circular_; }

private:
    QuantizerKind kind_ = QuantizerKind::Grid;
    GridQuantizer grid_;
    VoronoiQuantizer voronoi_;
    CircularQuantizer circular_;
};

// ---------------------------------------------------------------------------
// Temporal quantization
// ---------------------------------------------------------------------------

// Every slot boundary between the boundaries nearest to t_start and to t_end
// (ties snap toward the earlier slot), enumerated across day boundaries. An
// 8:53 to 9:08 interval with 10 minute slots yields {8:50, 9:00, 9:10}; an
// interval contained in the first half of one slot yields that slot alone.
// Slots are identified by their start boundary and may spill past the study
// calendar when an endpoint lies within half a slot of its edge; consumers
// that need day types skip such slots.
// Preconditions (violations throw DataError): t_start < t_end and
// slot_width_minutes divides 1440.
std::vector<TimeSlot> time_slots(std::int64_t t_start, std::int64_t t_end, int slot_width_minutes,
                                 const StudyCalendar& calendar);

}  // namespace actrec
