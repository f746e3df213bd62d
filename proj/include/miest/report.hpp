#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "miest/baseline.hpp"
#include "miest/calibrate.hpp"
#include "miest/engine.hpp"

namespace miest::report {

using Json = nlohmann::ordered_json;

std::string format_double(double v);

Json to_json(const ExtrapolationResult& r, bool with_points);
Json to_json(const MIEstimate& e, bool with_points);
Json to_json(const CalibrationReport& r);

// Fixed-width per-level table for people choosing b_max.
std::string calibration_table(const CalibrationReport& r);

// Everything needed to redraw the extrapolation lines and the
// intercept-versus-level curve of one pair.
Json pair_report(const Dataset& ds, std::size_t a, std::size_t b, const MIEstimate& e,
                 std::optional<double> pearson_correlation);

// Values grid; diagonal and skipped pairs are empty cells.
std::string matrix_csv(const MIMatrix& m);
// Per-pair metadata (chosen level, error bar, joint size) and skipped pairs.
Json matrix_sidecar(const MIMatrix& m);
Json skipped_pairs(const MIMatrix& m);
std::string sorted_matrix_csv(const MIMatrix& m, const SortedMatrix& s);

Json to_json(const TripletRecord& r, const Dataset& ds);
Json to_json(const GroupSummary& s, const Dataset& ds);
Json to_json(const ShuffleSummary& s);
Json to_json(const StabilityReport& s);

// "lower,upper,count" rows over [min, max] of the values.
std::string histogram_csv(std::span<const double> values, std::size_t bins);

// "var_a,var_b,n_joint,pc,mi_bits,gaussian_mi_bits,error".
std::string compare_pc_csv(std::span<const PcMiPoint> points, const Dataset& ds);

}  // namespace miest::report
