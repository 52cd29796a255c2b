#pragma once

#include "roboface/box_qp.hpp"
#include "roboface/lbs.hpp"

#include <string>
#include <vector>

namespace roboface {

/// frame - subject_neutral + canonical_neutral for every frame.
std::vector<Eigen::VectorXd> normalize_subject(const std::vector<Eigen::VectorXd>& frames,
                                               const FaceMesh& subject_neutral,
                                               const FaceMesh& canonical_neutral);

struct Projection {
  BlendCoefficients theta;
  /// ||neutral + E theta - target||^2 in mm^2.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Fits coefficients of one rig to dense targets. The B x B Gram matrix is
/// computed once at construction and shared by every projection.
class BasisProjector {
 public:
  explicit BasisProjector(const LbsRig& rig);

  Projection project(const Eigen::VectorXd& target_positions, const ProjectionSettings& settings,
                     const BlendCoefficients* warm_start = nullptr,
                     const IterationCallback& callback = {}) const;

  const LbsRig& rig() const { return *rig_; }

 private:
  const LbsRig* rig_;
  Eigen::MatrixXd basis_;  // 3U x B
  BoxLeastSquares solver_;
};

/// Box-constrained least-squares fit of `target` onto the rig basis.
Projection project_to_basis(const FaceMesh& target, const LbsRig& rig,
                            const ProjectionSettings& settings = {});

/// Projects every frame. Frames are split into contiguous chunks, one per
/// worker; within a chunk each frame warm-starts from its predecessor, so the
/// result depends only on `workers`, never on scheduling.
std::vector<Projection> project_sequence(const std::vector<Eigen::VectorXd>& frames,
                                         const LbsRig& rig, const ProjectionSettings& settings,
                                         unsigned workers = 1);

/// Reorders coefficients from the source rig's name order to the destination's.
/// Both rigs must carry the same name set.
BlendCoefficients transfer_coefficients(const BlendCoefficients& theta, const LbsRig& source_rig,
                                        const LbsRig& dest_rig);
BlendCoefficients transfer_coefficients(const BlendCoefficients& theta,
                                        const std::vector<std::string>& source_names,
                                        const std::vector<std::string>& dest_names);

struct CoefficientEdit {
  std::string name;
  double scale = 1.0;
  double offset = 0.0;
};

/// value' = clamp(scale * value + offset, 0, 1) on each named channel.
MotionSequence edit_coefficients(const MotionSequence& seq, const std::vector<std::string>& names,
                                 const std::vector<CoefficientEdit>& edits);

/// Worker count from ROBOFACE_THREADS, falling back to hardware concurrency.
unsigned default_worker_count();

}  // namespace roboface
