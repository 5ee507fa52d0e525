// Copyright 2026 The WNQ Authors
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

// Command-line front end over the wnq C API. Machine-readable records go
// to stdout, human-oriented notes to stderr. Exit codes: 0 success,
// 1 runtime/data error, 2 usage error.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wnq/wnq.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct TensorDeleter {
  void operator()(wnq_tensor* t) const { wnq_tensor_free(t); }
};
struct QuantizedDeleter {
  void operator()(wnq_quantized* q) const { wnq_quantized_free(q); }
};
using TensorPtr = std::unique_ptr<wnq_tensor, TensorDeleter>;
using QuantizedPtr = std::unique_ptr<wnq_quantized, QuantizedDeleter>;

// Fails hard on any non-OK status: prints the error and exits with 1.
void check(wnq_status status, const char* context) {
  if (status == WNQ_OK) return;
  std::fprintf(stderr, "error: %s: %s (%s)\n", context, wnq_last_error(),
               wnq_status_message(status));
  std::exit(kExitRuntime);
}

const std::map<std::string, wnq_method> kQuantMethods = {
    {"wnq", WNQ_METHOD_WNQ},
    {"lqnet", WNQ_METHOD_LQNET},
    {"residual", WNQ_METHOD_RESIDUAL},
    {"dorefa", WNQ_METHOD_DOREFA}};

const std::map<std::string, wnq_method> kTrainMethods = {
    {"wnq", WNQ_METHOD_WNQ},         {"lqnet", WNQ_METHOD_LQNET},
    {"residual", WNQ_METHOD_RESIDUAL}, {"dorefa", WNQ_METHOD_DOREFA},
    {"fp", WNQ_METHOD_FP}};

const std::map<std::string, wnq_dataset> kDatasets = {
    {"blobs", WNQ_DATASET_BLOBS}, {"spirals", WNQ_DATASET_SPIRALS}};

const std::map<std::string, wnq_net> kNets = {{"fc2", WNQ_NET_FC2},
                                              {"conv1", WNQ_NET_CONV1}};

struct QuantizeArgs {
  std::string input, output;
  wnq_method method = WNQ_METHOD_WNQ;
  int bits = 2;
  int iters = 20;
  double tol = 1e-8;
};

int run_quantize(const QuantizeArgs& a) {
  TensorPtr input;
  {
    wnq_tensor* raw = nullptr;
    check(wnq_tensor_read(a.input.c_str(), &raw), "reading input");
    input.reset(raw);
  }

  TensorPtr deq;
  if (a.method == WNQ_METHOD_DOREFA) {
    wnq_tensor* q = nullptr;
    check(wnq_quantize_dorefa(input.get(), a.bits, &q), "quantizing");
    deq.reset(q);
    check(wnq_tensor_write(deq.get(), a.output.c_str()), "writing output");
  } else {
    wnq_quant_config cfg;
    wnq_quant_config_init(&cfg);
    cfg.bits = a.bits;
    cfg.init_iters = a.iters;
    cfg.tol = a.tol;
    wnq_quantized* q = nullptr;
    check(wnq_quantize_tensor(input.get(), a.method, &cfg, &q), "quantizing");
    QuantizedPtr quantized(q);
    if (wnq_last_negative_alpha())
      std::fprintf(stderr,
                   "note: some filters learned a negative level parameter\n");
    check(wnq_quantized_write(quantized.get(), a.output.c_str()),
          "writing output");
    wnq_tensor* d = nullptr;
    check(wnq_quantized_dequantize(quantized.get(), &d), "dequantizing");
    deq.reset(d);
  }

  double mse = 0.0;
  check(wnq_relative_mse(input.get(), deq.get(), &mse), "computing mse");
  std::printf("relative_mse=%.9g\n", mse);
  return kExitOk;
}

struct StatsArgs {
  std::string input, quantized;
  int bins = 101;
};

int run_stats(const StatsArgs& a) {
  TensorPtr input;
  {
    wnq_tensor* raw = nullptr;
    check(wnq_tensor_read(a.input.c_str(), &raw), "reading input");
    input.reset(raw);
  }

  TensorPtr deq;
  int bits = 0;
  if (!a.quantized.empty()) {
    // The companion may be a packed WNQQ file or a plain tensor (DoReFa).
    wnq_quantized* q = nullptr;
    if (wnq_quantized_read(a.quantized.c_str(), &q) == WNQ_OK) {
      QuantizedPtr quantized(q);
      bits = wnq_quantized_bits(quantized.get());
      wnq_tensor* d = nullptr;
      check(wnq_quantized_dequantize(quantized.get(), &d), "dequantizing");
      deq.reset(d);
    } else {
      wnq_tensor* d = nullptr;
      check(wnq_tensor_read(a.quantized.c_str(), &d), "reading quantized");
      deq.reset(d);
    }
  }

  char* line = nullptr;
  check(wnq_report_line(input.get(), deq.get(), /*method=*/-1, bits, a.bins,
                        &line),
        "building report");
  std::printf("%s\n", line);
  wnq_string_free(line);
  return kExitOk;
}

struct GradcheckArgs {
  std::size_t m = 8;
  int k = 2;
  int seeds = 100;
  double eps = 1e-5;
};

int run_gradcheck(const GradcheckArgs& a) {
  constexpr double kBound = 1e-4;
  double worst = 0.0;
  std::vector<std::uint64_t> failures;
  for (int s = 1; s <= a.seeds; ++s) {
    double dev = 0.0;
    check(wnq_fd_check(a.m, static_cast<std::uint64_t>(s), a.eps, &dev),
          "finite-difference check");
    worst = dev > worst ? dev : worst;
    if (!(dev < kBound)) failures.push_back(static_cast<std::uint64_t>(s));
  }
  std::printf("gradcheck m=%zu k=%d seeds=%d eps=%.9g max_deviation=%.9g\n",
              a.m, a.k, a.seeds, a.eps, worst);
  if (!failures.empty()) {
    std::fprintf(stderr, "deviation >= %.1e at seeds:", kBound);
    for (std::uint64_t s : failures) std::fprintf(stderr, " %" PRIu64, s);
    std::fprintf(stderr, "\n");
    return kExitRuntime;
  }
  return kExitOk;
}

struct TrainArgs {
  wnq_train_config cfg;
  std::string out_dir;
  bool scratch = false;
};

int run_demo_train(TrainArgs a) {
  if (a.scratch) a.cfg.fp_steps = 0;
  a.cfg.quant.bits = a.cfg.bits;
  wnq_train_result result;
  check(wnq_demo_train(&a.cfg, a.out_dir.c_str(), &result), "training");
  std::printf("final loss=%.9g acc=%.9g\n", result.final_loss,
              result.final_accuracy);
  std::fprintf(stderr, "artifacts written to %s\n", a.out_dir.c_str());
  return kExitOk;
}

struct CompareArgs {
  wnq_train_config base;
  std::string out_dir;
  int seeds = 5;
  std::uint64_t seed0 = 1;
};

int run_compare(const CompareArgs& a) {
  const wnq_method methods[2] = {WNQ_METHOD_WNQ, WNQ_METHOD_LQNET};
  const char* names[2] = {"wnq", "lqnet"};

  std::filesystem::create_directories(a.out_dir);
  const std::string table_path = a.out_dir + "/summary.tsv";
  std::FILE* table = std::fopen(table_path.c_str(), "w");
  if (!table) {
    std::fprintf(stderr, "error: cannot open %s\n", table_path.c_str());
    return kExitRuntime;
  }

  auto emit_str = [&](const std::string& s) {
    std::fputs(s.c_str(), table);
    std::fputs(s.c_str(), stdout);
  };
  auto emit = [&](const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    emit_str(buf);
  };

  emit_str("method\tseed\tbits\tfinal_acc\tfinal_loss");
  // Layer count is fixed by the net topology: 2 for both fc2 and conv1.
  const std::size_t layers = 2;
  for (std::size_t l = 0; l < layers; ++l)
    emit("\tlayer%zu_mse\tlayer%zu_tail", l, l);
  emit_str("\n");

  for (int mi = 0; mi < 2; ++mi) {
    for (int s = 0; s < a.seeds; ++s) {
      wnq_train_config cfg = a.base;
      cfg.method = methods[mi];
      cfg.seed = a.seed0 + static_cast<std::uint64_t>(s);
      cfg.quant.bits = cfg.bits;
      const std::string run_dir = a.out_dir + "/" + names[mi] + "_seed" +
                                  std::to_string(cfg.seed);
      wnq_train_result r;
      check(wnq_demo_train(&cfg, run_dir.c_str(), &r), "training");
      emit("%s\t%" PRIu64 "\t%d\t%.9g\t%.9g", names[mi], cfg.seed, cfg.bits,
           r.final_accuracy, r.final_loss);
      for (std::size_t l = 0; l < r.layer_count; ++l) {
        if (r.layer_mse_defined[l])
          emit("\t%.9g", r.layer_relative_mse[l]);
        else
          emit_str("\tna");
        if (r.layer_tail_defined[l])
          emit("\t%.9g", r.layer_tail_ratio[l]);
        else
          emit_str("\tna");
      }
      emit_str("\n");
    }
  }
  std::fclose(table);
  std::fprintf(stderr, "summary written to %s\n", table_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-filter low-bit weight quantization toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  QuantizeArgs qa;
  CLI::App* quantize =
      app.add_subcommand("quantize", "quantize a WNQT tensor file");
  quantize->add_option("--input", qa.input, "input WNQT file")->required();
  quantize->add_option("--output", qa.output, "output file (WNQQ; WNQT for dorefa)")
      ->required();
  quantize->add_option("--bits", qa.bits, "bit-width K")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  quantize->add_option("--method", qa.method, "quantizer")
      ->transform(CLI::CheckedTransformer(kQuantMethods, CLI::ignore_case))
      ->capture_default_str();
  quantize->add_option("--iters", qa.iters, "alternating iterations")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  quantize->add_option("--tol", qa.tol, "objective-decrease stop threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::string dq_input, dq_output;
  CLI::App* dequantize =
      app.add_subcommand("dequantize", "expand a WNQQ file to a WNQT tensor");
  dequantize->add_option("--input", dq_input, "input WNQQ file")->required();
  dequantize->add_option("--output", dq_output, "output WNQT file")->required();

  StatsArgs sa;
  CLI::App* stats =
      app.add_subcommand("stats", "report weight distribution and error");
  stats->add_option("--input", sa.input, "input WNQT file")->required();
  stats->add_option("--quantized", sa.quantized,
                    "quantized companion (WNQQ or WNQT)");
  stats->add_option("--bins", sa.bins, "histogram bins")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();

  GradcheckArgs ga;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference validation of the backward rule");
  gradcheck->add_option("--m", ga.m, "filter size")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  gradcheck
      ->add_option("--k", ga.k,
                   "bit-width label for the run (the backward rule itself is "
                   "bit-width independent)")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  gradcheck->add_option("--seeds", ga.seeds, "number of seeded instances")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  gradcheck->add_option("--eps", ga.eps, "finite-difference step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  TrainArgs ta;
  wnq_train_config_init(&ta.cfg);
  CLI::App* train =
      app.add_subcommand("demo-train", "deterministic demo training run");
  train->add_option("--method", ta.cfg.method, "quantizer (fp disables)")
      ->transform(CLI::CheckedTransformer(kTrainMethods, CLI::ignore_case))
      ->capture_default_str();
  train->add_option("--bits", ta.cfg.bits, "bit-width K")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  train->add_option("--seed", ta.cfg.seed, "run seed")->capture_default_str();
  train->add_option("--steps", ta.cfg.steps, "steps with the chosen method")
      ->check(CLI::Range(0, 10000000))
      ->capture_default_str();
  train->add_option("--fp-steps", ta.cfg.fp_steps, "full-precision warm-up steps")
      ->check(CLI::Range(0, 10000000))
      ->capture_default_str();
  train->add_flag("--scratch", ta.scratch,
                  "skip the full-precision phase (train quantized from scratch)");
  train->add_option("--lr", ta.cfg.lr, "learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--momentum", ta.cfg.momentum, "SGD momentum")
      ->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();
  train->add_option("--batch", ta.cfg.batch, "batch size")
      ->check(CLI::Range(1, 512))
      ->capture_default_str();
  train->add_option("--hidden", ta.cfg.hidden, "hidden width")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  train->add_option("--dataset", ta.cfg.dataset, "training data")
      ->transform(CLI::CheckedTransformer(kDatasets, CLI::ignore_case))
      ->capture_default_str();
  train->add_option("--net", ta.cfg.net, "network topology")
      ->transform(CLI::CheckedTransformer(kNets, CLI::ignore_case))
      ->capture_default_str();
  train->add_option("--out-dir", ta.out_dir, "artifact directory")->required();

  CompareArgs ca;
  wnq_train_config_init(&ca.base);
  CLI::App* compare = app.add_subcommand(
      "compare", "paired wnq vs lqnet training runs over matched seeds");
  compare->add_option("--bits", ca.base.bits, "bit-width K")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  compare->add_option("--seeds", ca.seeds, "number of matched seeds")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  compare->add_option("--seed0", ca.seed0, "first seed")->capture_default_str();
  compare->add_option("--steps", ca.base.steps, "steps with each method")
      ->check(CLI::Range(0, 10000000))
      ->capture_default_str();
  compare->add_option("--fp-steps", ca.base.fp_steps,
                      "full-precision warm-up steps")
      ->check(CLI::Range(0, 10000000))
      ->capture_default_str();
  compare->add_option("--lr", ca.base.lr, "learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  compare->add_option("--batch", ca.base.batch, "batch size")
      ->check(CLI::Range(1, 512))
      ->capture_default_str();
  compare->add_option("--hidden", ca.base.hidden, "hidden width")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  compare->add_option("--dataset", ca.base.dataset, "training data")
      ->transform(CLI::CheckedTransformer(kDatasets, CLI::ignore_case))
      ->capture_default_str();
  compare->add_option("--net", ca.base.net, "network topology")
      ->transform(CLI::CheckedTransformer(kNets, CLI::ignore_case))
      ->capture_default_str();
  compare->add_option("--out-dir", ca.out_dir, "artifact directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (quantize->parsed()) return run_quantize(qa);
  if (dequantize->parsed()) {
    wnq_quantized* q = nullptr;
    check(wnq_quantized_read(dq_input.c_str(), &q), "reading input");
    QuantizedPtr quantized(q);
    wnq_tensor* d = nullptr;
    check(wnq_quantized_dequantize(quantized.get(), &d), "dequantizing");
    TensorPtr deq(d);
    check(wnq_tensor_write(deq.get(), dq_output.c_str()), "writing output");
    return kExitOk;
  }
  if (stats->parsed()) return run_stats(sa);
  if (gradcheck->parsed()) return run_gradcheck(ga);
  if (train->parsed()) return run_demo_train(ta);
  if (compare->parsed()) return run_compare(ca);
  return kExitUsage;
}
