// Copyright 2026 The crossmask Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <utility>

#include "CLI11.hpp"
#include "crossmask/crossmask.hpp"
#include "run_config.hpp"

namespace crossmask::cli {

namespace {

namespace fs = std::filesystem;

std::string format(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

const CLI::Validator kExtentValidator(
    [](std::string& value) -> std::string {
      try {
        parse_extent(value);
      } catch (const Error& e) {
        return e.detail();
      }
      return {};
    },
    "HxW");

const std::map<std::string, CrfMode> kCrfModes{{"fast", CrfMode::kFast},
                                               {"brute", CrfMode::kBrute}};

// Flags shared by the commands that take a RunConfig.
struct ConfigFlags {
  fs::path config;
  std::string crf_mode;
  CLI::Option* crf_mode_opt = nullptr;

  void add_to(CLI::App* cmd, bool with_crf_mode) {
    cmd->add_option("--config", config, "INI run configuration")->check(CLI::ExistingFile);
    if (with_crf_mode) {
      crf_mode_opt = cmd->add_option("--crf-mode", crf_mode, "DenseCRF message passing: fast or brute")
                         ->check(CLI::IsMember({"fast", "brute"}));
    }
  }

  RunConfig load(unsigned threads, CLI::Option* threads_opt) const {
    RunConfig rc = config.empty() ? RunConfig{} : load_run_config(config);
    if (crf_mode_opt != nullptr && crf_mode_opt->count() > 0) {
      rc.pipeline.crf_mode = kCrfModes.at(crf_mode);
    }
    if (threads_opt->count() > 0) rc.pipeline.parallelism.threads = threads;
    return rc;
  }
};

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot list " + dir.string() + ": " + ec.message());
  std::vector<fs::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::optional<fs::path> image_for_stem(const fs::path& dir, const fs::path& stem) {
  for (const char* ext : {".pgm", ".ppm"}) {
    auto candidate = dir / stem;
    candidate += ext;
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace

std::string format_inspect(const AttentionStack& stack) {
  std::string s = "token_count " + std::to_string(stack.token_count()) + "\n";
  s += "record_count " + std::to_string(stack.records().size()) + "\n";
  std::set<std::pair<std::uint32_t, std::uint32_t>> sizes;
  for (const auto& r : stack.records()) sizes.insert({r.height, r.width});
  s += "resolutions";
  for (const auto& [h, w] : sizes) s += " " + std::to_string(h) + "x" + std::to_string(w);
  s += "\n";
  for (const auto& r : stack.records()) {
    const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
    s += "record step=" + std::to_string(r.step) + " layer=" + std::to_string(r.layer) +
         " token=" + std::to_string(r.token) + " size=" + std::to_string(r.height) + "x" +
         std::to_string(r.width) + " min=" + format("%.9g", *lo) + " max=" + format("%.9g", *hi) +
         "\n";
  }
  return s;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Turn cross-attention map stacks into refined binary segmentation masks.",
               "crossmask"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  unsigned threads = 0;
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker thread cap (default: all cores)")
          ->check(CLI::PositiveNumber);

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "Average a token's attention records (ATNS -> field)");
  fs::path agg_attn, agg_out;
  std::uint32_t agg_token = 0;
  std::string agg_size = "64x64";
  aggregate->add_option("--attn", agg_attn, "Input ATNS stack")->required()->check(CLI::ExistingFile);
  aggregate->add_option("--out", agg_out, "Output field file")->required();
  aggregate->add_option("--token", agg_token, "Token index")->capture_default_str();
  aggregate->add_option("--size", agg_size, "Aggregation resolution")->capture_default_str()->check(kExtentValidator);

  // binarize
  auto* binarize = app.add_subcommand("binarize", "Threshold a field into a mask (value > gamma)");
  fs::path bin_field, bin_out;
  double bin_gamma = 0.5;
  binarize->add_option("--field", bin_field, "Input field file")->required()->check(CLI::ExistingFile);
  binarize->add_option("--gamma", bin_gamma, "Threshold in (0, 1)")->required();
  binarize->add_option("--out", bin_out, "Output mask (PGM)")->required();

  // crf
  auto* crf = app.add_subcommand("crf", "Refine a mask or field with DenseCRF");
  fs::path crf_mask, crf_field, crf_image, crf_out, crf_posterior;
  ConfigFlags crf_flags;
  auto* crf_mask_opt = crf->add_option("--mask", crf_mask, "Input mask (PGM)")->check(CLI::ExistingFile);
  auto* crf_field_opt = crf->add_option("--field", crf_field, "Input probability field")->check(CLI::ExistingFile);
  crf_mask_opt->excludes(crf_field_opt);
  crf->add_option("--image", crf_image, "Feature image (PGM/PPM)")->required()->check(CLI::ExistingFile);
  crf->add_option("--out", crf_out, "Output mask (PGM)")->required();
  crf->add_option("--posterior", crf_posterior, "Also write the foreground marginal as a field");
  crf_flags.add_to(crf, true);

  // affinity
  auto* affinity = app.add_subcommand("affinity", "Propagate confident regions of a field (field -> B-hat)");
  fs::path aff_field, aff_image, aff_out;
  ConfigFlags aff_flags;
  affinity->add_option("--field", aff_field, "Input field file")->required()->check(CLI::ExistingFile);
  affinity->add_option("--image", aff_image, "Feature image; defaults to the field itself")
      ->check(CLI::ExistingFile);
  affinity->add_option("--out", aff_out, "Output field file")->required();
  aff_flags.add_to(affinity, false);

  // select-threshold
  auto* select = app.add_subcommand("select-threshold", "Pick the grid threshold that best matches B-hat");
  std::vector<fs::path> sel_fields, sel_bhats;
  std::string sel_grid;
  ConfigFlags sel_flags;
  select->add_option("--field", sel_fields, "Attention field (repeat for batch mode)")
      ->required()
      ->check(CLI::ExistingFile);
  select->add_option("--bhat", sel_bhats, "B-hat field, paired with --field in order")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sel_grid_opt = select->add_option("--grid", sel_grid, "Comma-separated thresholds");
  sel_flags.add_to(select, false);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run Method 1 or Method 2 end to end");
  fs::path pipe_attn, pipe_image, pipe_bhat, pipe_out, pipe_attn_dir, pipe_image_dir, pipe_out_dir;
  int pipe_method = 2;
  std::uint32_t pipe_token = 0;
  ConfigFlags pipe_flags;
  auto* method_opt = pipeline->add_option("--method", pipe_method, "1 = cross fusion, 2 = sequential")
                         ->check(CLI::IsMember({1, 2}));
  auto* token_opt = pipeline->add_option("--token", pipe_token, "Token index");
  auto* attn_opt = pipeline->add_option("--attn", pipe_attn, "Input ATNS stack");
  auto* image_opt = pipeline->add_option("--image", pipe_image, "Feature image (PGM/PPM)");
  auto* bhat_opt = pipeline->add_option("--bhat", pipe_bhat, "External B-hat field");
  auto* out_opt = pipeline->add_option("--out", pipe_out, "Output mask (PGM)");
  auto* attn_dir_opt = pipeline->add_option("--attn-dir", pipe_attn_dir, "Batch: directory of .atns files")
                           ->check(CLI::ExistingDirectory);
  pipeline->add_option("--image-dir", pipe_image_dir, "Batch: images named after each stack")
      ->check(CLI::ExistingDirectory)
      ->needs(attn_dir_opt);
  auto* out_dir_opt = pipeline->add_option("--out-dir", pipe_out_dir, "Batch: output directory")
                          ->needs(attn_dir_opt);
  attn_dir_opt->needs(out_dir_opt);
  attn_dir_opt->excludes(attn_opt);
  attn_dir_opt->excludes(image_opt);
  attn_dir_opt->excludes(bhat_opt);
  attn_dir_opt->excludes(out_opt);
  pipe_flags.add_to(pipeline, true);

  // eval
  auto* eval = app.add_subcommand("eval", "IoU of predicted masks against ground truth");
  fs::path eval_pred, eval_gt, eval_out;
  std::string eval_format = "csv";
  eval->add_option("--pred", eval_pred, "Directory of predicted masks")->required();
  eval->add_option("--gt", eval_gt, "Directory of ground-truth masks")->required();
  eval->add_option("--format", eval_format, "Report format: csv or jsonl")->capture_default_str()
      ->check(CLI::IsMember({"csv", "jsonl"}));
  eval->add_option("--out", eval_out, "Report file");

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Write a synthetic stack, image and ground truth");
  fs::path fix_dir;
  bool fix_golden = false;
  ConfigFlags fix_flags;
  fixture->add_option("--out-dir", fix_dir, "Output directory")->required();
  fixture->add_flag("--golden", fix_golden, "Use the golden disk (noise 0.1, blur 1, seed 42)");
  fix_flags.add_to(fixture, false);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Validate an ATNS file and summarise its records");
  fs::path insp_attn;
  inspect->add_option("attn", insp_attn, "ATNS file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    const Parallelism par{threads_opt->count() > 0 ? threads : 0u};

    if (aggregate->parsed()) {
      const auto stack = read_attention_stack(agg_attn);
      write_field(aggregate_token(stack, agg_token, parse_extent(agg_size), par), agg_out);
    } else if (binarize->parsed()) {
      write_mask(threshold_binarize(read_field(bin_field), Threshold(bin_gamma)), bin_out);
    } else if (crf->parsed()) {
      if (crf_mask_opt->count() == 0 && crf_field_opt->count() == 0) {
        err << "crf: one of --mask or --field is required\n" << crf->help();
        return kExitUsage;
      }
      const auto rc = crf_flags.load(threads, threads_opt);
      const auto& p = rc.pipeline;
      const auto unary = crf_mask_opt->count() > 0
                             ? unary_from_mask(read_mask(crf_mask), p.crf.mask_confidence)
                             : unary_from_field(read_field(crf_field), p.crf.unary_epsilon);
      const auto result =
          mean_field_refine(unary, read_feature_image(crf_image), p.crf, p.crf_mode, p.parallelism);
      write_mask(result.mask, crf_out);
      if (!crf_posterior.empty()) write_field(result.posterior.foreground_field(), crf_posterior);
    } else if (affinity->parsed()) {
      const auto rc = aff_flags.load(threads, threads_opt);
      const auto field = read_field(aff_field);
      const auto features = aff_image.empty()
                                ? AffinityFeatures::from_field(field)
                                : AffinityFeatures::from_image(read_feature_image(aff_image));
      write_field(affinity_map(field, features, rc.pipeline.affinity, rc.pipeline.parallelism),
                  aff_out);
    } else if (select->parsed()) {
      if (sel_fields.size() != sel_bhats.size()) {
        err << "select-threshold: --field and --bhat must be given the same number of times\n"
            << select->help();
        return kExitUsage;
      }
      const auto rc = sel_flags.load(threads, threads_opt);
      const ThresholdGrid grid =
          sel_grid_opt->count() > 0 ? ThresholdGrid(parse_double_list(sel_grid)) : rc.pipeline.grid;
      std::vector<ScalarField> fields, bhats;
      for (const auto& f : sel_fields) fields.push_back(read_field(f));
      for (const auto& b : sel_bhats) bhats.push_back(read_field(b));
      const auto sel = select_threshold_batch(fields, bhats, grid);
      out << "gamma " << format("%.6g", sel.gamma) << "\n"
          << "score " << format("%.6f", sel.score) << "\n";
    } else if (pipeline->parsed()) {
      auto rc = pipe_flags.load(threads, threads_opt);
      if (method_opt->count() > 0) rc.pipeline.method = static_cast<Method>(pipe_method);
      if (token_opt->count() > 0) rc.pipeline.token = pipe_token;
      if (attn_opt->count() > 0) rc.io.attn = pipe_attn;
      if (image_opt->count() > 0) rc.io.image = pipe_image;
      if (bhat_opt->count() > 0) rc.io.bhat = pipe_bhat;
      if (out_opt->count() > 0) rc.io.out = pipe_out;

      if (attn_dir_opt->count() > 0) {
        const auto stacks = files_with_extension(pipe_attn_dir, ".atns");
        fs::create_directories(pipe_out_dir);
        auto per_file = rc.pipeline;
        per_file.parallelism.threads = 1;
        std::vector<std::exception_ptr> failures(stacks.size());
        parallel_for(stacks.size(), rc.pipeline.parallelism, [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            try {
              const auto stem = stacks[i].stem();
              PipelineInputs in{read_attention_stack(stacks[i]), std::nullopt, std::nullopt};
              if (!pipe_image_dir.empty()) {
                const auto image = image_for_stem(pipe_image_dir, stem);
                if (!image) {
                  throw Error(ErrorCode::kIoFailure,
                              "no image for " + stem.string() + " in " + pipe_image_dir.string());
                }
                in.image = read_feature_image(*image);
              }
              auto out_path = pipe_out_dir / stem;
              out_path += ".pgm";
              write_mask(run_pipeline(in, per_file).mask, out_path);
            } catch (...) {
              failures[i] = std::current_exception();
            }
          }
        });
        for (const auto& f : failures) {
          if (f) std::rethrow_exception(f);
        }
      } else {
        if (rc.io.attn.empty() || rc.io.out.empty()) {
          err << "pipeline: --attn and --out (or [io] attn/out in --config) are required\n"
              << pipeline->help();
          return kExitUsage;
        }
        PipelineInputs in{read_attention_stack(rc.io.attn), std::nullopt, std::nullopt};
        if (!rc.io.image.empty()) in.image = read_feature_image(rc.io.image);
        if (!rc.io.bhat.empty()) in.b_hat = read_field(rc.io.bhat);
        write_mask(run_pipeline(in, rc.pipeline).mask, rc.io.out);
      }
    } else if (eval->parsed()) {
      const auto report = batch_evaluate(eval_pred, eval_gt, par);
      const auto fmt = eval_format == "csv" ? ReportFormat::kCsv : ReportFormat::kJsonLines;
      if (!eval_out.empty()) write_report(report, eval_out, fmt);
      out << "mean_iou " << format("%.6f", report.mean_iou) << "\n"
          << "count " << report.count << "\n";
    } else if (fixture->parsed()) {
      auto rc = fix_flags.load(threads, threads_opt);
      if (fix_golden) {
        const auto golden = FixtureSpec::golden_disk();
        rc.fixture.noise = golden.noise;
        rc.fixture.blur_radius = golden.blur_radius;
        rc.fixture.seed = golden.seed;
      }
      write_fixture(generate_fixture(rc.fixture), fix_dir);
    } else if (inspect->parsed()) {
      out << format_inspect(read_attention_stack(insp_attn));
    }
  } catch (const Error& e) {
    err << "ERROR " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "ERROR " << to_string(ErrorCode::kIoFailure) << ": " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace crossmask::cli
