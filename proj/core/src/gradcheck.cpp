#include "alrn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "alrn/rng.hpp"

namespace alrn {

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {
      "full", "no-arm", "no-scu", "no-global", "no-mse", "softmax-revision"};
  return names;
}

void apply_variant(const std::string& name, ModelConfig& model, LossConfig& loss) {
  if (name.empty() || name == "full") return;
  if (name == "no-arm") {
    model.use_arm = false;
  } else if (name == "no-scu") {
    model.use_scu = false;
  } else if (name == "no-global") {
    model.use_global = false;
  } else if (name == "no-mse") {
    loss.mse_weight = 0.0;
  } else if (name == "softmax-revision") {
    model.revision_activation = RevisionActivation::kSoftmax;
  } else {
    throw ConfigError("unknown variant \"" + name + "\"");
  }
}

double relative_error(double analytic, double numeric, double floor_value) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor_value});
  return std::abs(analytic - numeric) / denom;
}

GradCheckSpec default_gradcheck_spec() {
  GradCheckSpec spec;
  spec.model.num_attributes = 4;
  spec.model.feature_channels = 6;
  spec.model.adapter_channels = 5;
  return spec;
}

GradCheckResult run_gradcheck(const GradCheckSpec& spec) {
  if (spec.num_seen < 1) throw ConfigError("gradcheck needs at least one seen class");
  if (spec.batch < 1) throw ConfigError("gradcheck needs a non-empty batch");

  Rng rng(spec.seed, "gradcheck");
  const int num_classes = spec.num_seen + spec.num_unseen;

  // Semantics in synthetic style, but every seen column is kept
  // nonzero so each score actually depends on the parameters.
  Matrix semantics(spec.model.num_attributes, num_classes);
  for (int i = 0; i < num_classes; ++i) {
    bool any = false;
    do {
      any = false;
      for (int n = 0; n < spec.model.num_attributes; ++n) {
        const double v = rng.uniform() < 0.5 ? rng.uniform() : 0.0;
        semantics.at(n, i) = v;
        any = any || v > 0.0;
      }
    } while (!any && i < spec.num_seen);
  }

  std::vector<int> seen_classes(spec.num_seen);
  for (int i = 0; i < spec.num_seen; ++i) seen_classes[i] = i;

  std::vector<Tensor3> images(spec.batch);
  BatchView batch;
  for (int b = 0; b < spec.batch; ++b) {
    images[b] = Tensor3(spec.model.input_channels(), spec.height, spec.width);
    for (double& v : images[b].data) v = rng.normal();
    batch.images.push_back(&images[b]);
    batch.labels.push_back(rng.uniform_int(spec.num_seen));
  }

  ParameterSet params = init_parameters(spec.model, rng.next());
  GradientSet analytic = backward(batch, params, semantics, seen_classes, spec.model,
                                  spec.loss, spec.stage);
  GradientSet numeric = finite_diff_gradients(batch, params, semantics, seen_classes,
                                              spec.model, spec.loss, spec.stage,
                                              spec.step);

  GradCheckResult result;
  result.passed = true;
  auto a_refs = parameter_buffers(analytic);
  auto n_refs = parameter_buffers(numeric);
  for (std::size_t r = 0; r < a_refs.size(); ++r) {
    GradCheckGroup group;
    group.name = a_refs[r].name;
    group.skipped = a_refs[r].adapter && spec.stage == TrainStage::kKernelsOnly;
    if (!group.skipped) {
      const std::vector<double>& a = *a_refs[r].values;
      const std::vector<double>& n = *n_refs[r].values;
      for (std::size_t i = 0; i < a.size(); ++i)
        group.max_rel_error =
            std::max(group.max_rel_error, relative_error(a[i], n[i], kGradCheckFloor));
      if (group.max_rel_error >= kGradCheckTolerance) result.passed = false;
    }
    result.groups.push_back(std::move(group));
  }
  return result;
}

}  // namespace alrn
