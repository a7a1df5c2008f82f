#pragma once

#include <cstddef>
#include <vector>

#include "ctgp/lie.hpp"

namespace ctgp {

/// Relative translation error over path segments of fixed length.
struct SegmentErrors {
  /// Requested lengths with at least one segment, in increasing order.
  std::vector<double> lengths;
  /// Mean error per length in percent of the segment length.
  std::vector<double> mean_percent;
  std::vector<std::size_t> counts;
  /// Mean over all segments of all lengths (count-weighted mean of the rows).
  double overall_percent = 0.0;
  std::size_t total_count = 0;

  bool empty() const { return total_count == 0; }
};

/// Segment translation error between two time-aligned pose sequences.
///
/// Poses map reference-frame points into the body frame (p = T q). For every
/// start index and every length L, the end index is the first sample whose
/// ground-truth arc length from the start reaches L. The error is
/// |t_est - t_gt| / L, where t is the translation of P_a^-1 P_b with P = T^-1.
/// Lengths with no complete segment are omitted; if none fit, the result is
/// empty. Throws InvalidArgument on mismatched sizes or non-increasing lengths.
SegmentErrors segment_translation_error(const std::vector<Pose>& estimate,
                                        const std::vector<Pose>& ground_truth,
                                        const std::vector<double>& lengths,
                                        std::size_t start_stride = 1);

}  // namespace ctgp
