#include "roboface/retarget.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace roboface {

std::vector<Eigen::VectorXd> normalize_subject(const std::vector<Eigen::VectorXd>& frames,
                                               const FaceMesh& subject_neutral,
                                               const FaceMesh& canonical_neutral) {
  const auto n = subject_neutral.positions.size();
  if (canonical_neutral.positions.size() != n) {
    throw std::invalid_argument("subject and canonical neutrals differ in vertex count");
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    if (f.size() != n) throw std::invalid_argument("frame vertex count differs from the neutral");
    out.emplace_back(f - subject_neutral.positions + canonical_neutral.positions);
  }
  return out;
}

BasisProjector::BasisProjector(const LbsRig& rig)
    : rig_(&rig), basis_(rig.basis.as_matrix()), solver_(Eigen::MatrixXd()) {
  if (auto issues = validate_rig(rig); !issues.empty()) {
    throw std::invalid_argument("cannot project onto invalid rig: " + issues.front());
  }
  Eigen::MatrixXd gram(basis_.cols(), basis_.cols());
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(basis_.transpose());
  solver_ = BoxLeastSquares(Eigen::MatrixXd(gram.selfadjointView<Eigen::Lower>()));
}

Projection BasisProjector::project(const Eigen::VectorXd& target_positions,
                                   const ProjectionSettings& settings,
                                   const BlendCoefficients* warm_start,
                                   const IterationCallback& callback) const {
  if (target_positions.size() != rig_->mesh.positions.size()) {
    throw std::invalid_argument("target vertex count does not match the rig");
  }
  const Eigen::VectorXd offset = target_positions - rig_->mesh.positions;
  const Eigen::VectorXd atb = basis_.transpose() * offset;
  const Eigen::VectorXd warm = warm_start ? warm_start->values : Eigen::VectorXd();
  BoxSolveResult r = solver_.solve(atb, offset.squaredNorm(), settings, warm, callback);

  Projection p;
  p.residual = (basis_ * r.x - offset).squaredNorm();
  p.theta = BlendCoefficients(std::move(r.x));
  p.iterations = r.iterations;
  p.converged = r.converged;
  return p;
}

Projection project_to_basis(const FaceMesh& target, const LbsRig& rig,
                            const ProjectionSettings& settings) {
  if (target.vertex_count() != rig.vertex_count()) {
    throw std::invalid_argument("target vertex count does not match the rig");
  }
  return BasisProjector(rig).project(target.positions, settings);
}

std::vector<Projection> project_sequence(const std::vector<Eigen::VectorXd>& frames,
                                         const LbsRig& rig, const ProjectionSettings& settings,
                                         unsigned workers) {
  const BasisProjector projector(rig);
  std::vector<Projection> out(frames.size());
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(frames.size())));
  const std::size_t chunk = (frames.size() + workers - 1) / std::max(1u, workers);

  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    const BlendCoefficients* warm = nullptr;
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = projector.project(frames[i], settings, warm);
      warm = &out[i].theta;
    }
  };

  if (workers <= 1) {
    run_chunk(0, frames.size());
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t begin = 0; begin < frames.size(); begin += chunk) {
    pool.emplace_back(run_chunk, begin, std::min(frames.size(), begin + chunk));
  }
  for (auto& t : pool) t.join();
  return out;
}

BlendCoefficients transfer_coefficients(const BlendCoefficients& theta,
                                        const std::vector<std::string>& source_names,
                                        const std::vector<std::string>& dest_names) {
  if (theta.size() != source_names.size()) {
    throw std::invalid_argument("coefficient count does not match the source rig");
  }
  std::unordered_map<std::string, std::size_t> source_index;
  for (std::size_t i = 0; i < source_names.size(); ++i) source_index.emplace(source_names[i], i);

  std::vector<std::string> missing;
  std::vector<std::size_t> order(dest_names.size());
  std::vector<bool> used(source_names.size(), false);
  for (std::size_t d = 0; d < dest_names.size(); ++d) {
    auto it = source_index.find(dest_names[d]);
    if (it == source_index.end()) {
      missing.push_back(dest_names[d]);
    } else {
      order[d] = it->second;
      used[it->second] = true;
    }
  }
  std::vector<std::string> extra;
  for (std::size_t i = 0; i < source_names.size(); ++i) {
    if (!used[i]) extra.push_back(source_names[i]);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "blendshape name sets differ;";
    if (!missing.empty()) {
      msg += " missing from source:";
      for (auto& m : missing) msg += " " + m;
      msg += ";";
    }
    if (!extra.empty()) {
      msg += " missing from destination:";
      for (auto& e : extra) msg += " " + e;
    }
    throw std::invalid_argument(msg);
  }

  BlendCoefficients out = BlendCoefficients::zeros(dest_names.size());
  for (std::size_t d = 0; d < dest_names.size(); ++d) {
    out.values[static_cast<Eigen::Index>(d)] = theta.values[static_cast<Eigen::Index>(order[d])];
  }
  return out;
}

BlendCoefficients transfer_coefficients(const BlendCoefficients& theta, const LbsRig& source_rig,
                                        const LbsRig& dest_rig) {
  return transfer_coefficients(theta, source_rig.basis.names, dest_rig.basis.names);
}

MotionSequence edit_coefficients(const MotionSequence& seq, const std::vector<std::string>& names,
                                 const std::vector<CoefficientEdit>& edits) {
  validate_motion(seq);
  if (!seq.frames.empty() && seq.blendshape_count() != names.size()) {
    throw std::invalid_argument("name list does not match the motion's blendshape count");
  }
  std::vector<std::pair<Eigen::Index, const CoefficientEdit*>> resolved;
  for (const auto& e : edits) {
    auto it = std::find(names.begin(), names.end(), e.name);
    if (it == names.end()) throw std::invalid_argument("unknown blendshape '" + e.name + "'");
    resolved.emplace_back(static_cast<Eigen::Index>(it - names.begin()), &e);
  }
  MotionSequence out = seq;
  for (auto& frame : out.frames) {
    for (auto [idx, e] : resolved) {
      frame.values[idx] = std::clamp(e->scale * frame.values[idx] + e->offset, 0.0, 1.0);
    }
  }
  return out;
}

unsigned default_worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ROBOFACE_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

}  // namespace roboface
