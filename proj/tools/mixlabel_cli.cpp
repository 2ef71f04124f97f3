// mixlabel: mixed-grained label tooling for LiDAR detection datasets.
#include <iostream>

#include <CLI11.hpp>

#include "mixlabel/commands.hpp"

namespace cli = mixlabel::cli;

int main(int argc, char** argv) {
  CLI::App app{"Coarse cluster labels, mixed label assignment and label maintenance for LiDAR scenes"};
  app.require_subcommand(1);
  app.fallthrough();

  cli::GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--manifest", g.manifest, "Scene manifest (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Global seed (overrides the manifest seed)");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Output directory");

  cli::GenLabelsOptions gen;
  std::vector<std::string> weights;
  auto* gen_cmd = app.add_subcommand("gen-labels", "Select the box budget and derive noisy clusters for the rest");
  gen_cmd->add_option("--noise", gen.noise, "Noise preset: none, noise0, noise1, noise2")->capture_default_str();
  gen_cmd->add_option("--noise-config", gen.noise_config, "JSON file with named noise presets");
  gen_cmd->add_option("--ratio", gen.ratio, "Fraction of boxes kept as accurate labels")->capture_default_str();
  gen_cmd->add_option("--class-weight", weights, "Sampling weight per class, cls=weight (repeatable)");

  cli::AssignOptions asg;
  auto* asg_cmd = app.add_subcommand("assign", "Run center- or box-based label assignment");
  asg_cmd->add_option("--mode", asg.mode, "center or box")->check(CLI::IsMember({"center", "box"}))->capture_default_str();
  asg_cmd->add_option("--config", asg.config, "Detector config (JSON)")->required()->check(CLI::ExistingFile);
  asg_cmd->add_option("--labels-dir", asg.labels_dir, "Label files (default <out-dir>/labels)");

  cli::PointSamOptions ps;
  auto* ps_cmd = app.add_subcommand("pointsam", "Lift 2D masks onto points and refine them into clusters");
  ps_cmd->add_option("--radii", ps.radii_config, "Per-class CCL radii (JSON)")->check(CLI::ExistingFile);
  ps_cmd->add_option("--calib-noise-cm", ps.calib_noise_cm, "Camera translation noise half-range in cm")->capture_default_str();

  cli::EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Panoptic PQ/SQ/RQ and segmentation mIoU");
  ev_cmd->add_option("--pred-dir", ev.pred_dir, "Predicted label files")->required();
  ev_cmd->add_option("--gt-dir", ev.gt_dir, "Ground-truth label files (default: manifest labels)");
  ev_cmd->add_option("--iou-match", ev.iou_match, "Matching IoU threshold")->capture_default_str();

  cli::SelfTrainOptions st;
  auto* st_cmd = app.add_subcommand("selftrain", "Replace clusters with high-score pseudo boxes (one round)");
  st_cmd->add_option("--labels-dir", st.labels_dir, "Label files (default <out-dir>/labels)");
  st_cmd->add_option("--pseudo-dir", st.pseudo_dir, "Pseudo-box files (default: manifest pseudo)");
  st_cmd->add_option("--score-thresh", st.score_thresh, "Minimum pseudo-box score (exclusive)")->capture_default_str();
  st_cmd->add_option("--match-iou", st.match_iou, "Minimum box-cluster IoU to replace")->capture_default_str();

  cli::CostOptions co;
  auto* co_cmd = app.add_subcommand("cost", "Annotation cost of a label set");
  co_cmd->add_option("--labels-dir", co.labels_dir, "Label files (default <out-dir>/labels)");
  co_cmd->add_option("--total", co.n_total, "Total label count N_t (default: ground-truth boxes)");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (*gen_cmd) {
      gen.class_weights = cli::parse_class_weights(weights);
      return cli::gen_labels(g, gen, std::cout, std::cerr);
    }
    if (*asg_cmd) return cli::assign(g, asg, std::cout, std::cerr);
    if (*ps_cmd) return cli::pointsam(g, ps, std::cout, std::cerr);
    if (*ev_cmd) return cli::eval(g, ev, std::cout, std::cerr);
    if (*st_cmd) return cli::selftrain(g, st, std::cout, std::cerr);
    if (*co_cmd) return cli::cost(g, co, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
