#include "ctgp/metrics.hpp"

#include <algorithm>

#include "ctgp/errors.hpp"

namespace ctgp {

SegmentErrors segment_translation_error(const std::vector<Pose>& estimate,
                                        const std::vector<Pose>& ground_truth,
                                        const std::vector<double>& lengths,
                                        std::size_t start_stride) {
  if (estimate.size() != ground_truth.size()) {
    throw InvalidArgument("estimate and ground truth must have the same number of poses");
  }
  if (start_stride == 0) throw InvalidArgument("start stride must be >= 1");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 0.0) || (i > 0 && !(lengths[i] > lengths[i - 1]))) {
      throw InvalidArgument("segment lengths must be positive and strictly increasing");
    }
  }

  const std::size_t n = ground_truth.size();
  std::vector<Pose> est_inv(n), gt_inv(n);
  std::vector<double> arc(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    est_inv[k] = estimate[k].inverse();
    gt_inv[k] = ground_truth[k].inverse();
    if (k > 0) {
      arc[k] = arc[k - 1] + (gt_inv[k].translation() - gt_inv[k - 1].translation()).norm();
    }
  }

  SegmentErrors out;
  double total = 0.0;
  for (const double L : lengths) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < n; a += start_stride) {
      const auto it = std::lower_bound(arc.begin() + a, arc.end(), arc[a] + L);
      if (it == arc.end()) break;
      const std::size_t b = static_cast<std::size_t>(it - arc.begin());
      const Vector3d d_est = (estimate[a] * est_inv[b]).translation();
      const Vector3d d_gt = (ground_truth[a] * gt_inv[b]).translation();
      sum += (d_est - d_gt).norm() / L;
      ++count;
    }
    if (count == 0) continue;
    out.lengths.push_back(L);
    out.mean_percent.push_back(100.0 * sum / static_cast<double>(count));
    out.counts.push_back(count);
    total += 100.0 * sum;
    out.total_count += count;
  }
  if (out.total_count > 0) out.overall_percent = total / static_cast<double>(out.total_count);
  return out;
}

}  // namespace ctgp
