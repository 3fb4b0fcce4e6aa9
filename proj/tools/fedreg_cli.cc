/*
 * Copyright 2026 The fedreg Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedreg/ahe.h"
#include "fedreg/bench.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/dataset.h"
#include "fedreg/error.h"
#include "fedreg/experiment.h"
#include "fedreg/fedtrain.h"
#include "fedreg/oblivpred.h"
#include "fedreg/slg.h"

namespace {

using namespace fedreg;

constexpr int kExitAbort = 2;
constexpr int kExitConfig = 3;

int ExitCodeFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kProtocolAbort:
    case ErrorCode::kAuthentication:
    case ErrorCode::kSessionMismatch:
    case ErrorCode::kInsufficientShares:
      return kExitAbort;
    default:
      return kExitConfig;
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  out << text;
}

std::vector<double> ParseRow(const std::string& row) {
  std::istringstream in(row);
  std::vector<double> out;
  std::string cell;
  size_t col = 0;
  while (std::getline(in, cell, ',')) {
    ++col;
    const size_t a = cell.find_first_not_of(" \t");
    const size_t b = cell.find_last_not_of(" \t");
    double v = 0;
    const char* first = cell.data() + (a == std::string::npos ? 0 : a);
    const char* last = cell.data() + (b == std::string::npos ? 0 : b + 1);
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (a == std::string::npos || ec != std::errc() || ptr != last ||
        !std::isfinite(v)) {
      throw Error(ErrorCode::kParse, "input column " + std::to_string(col) +
                                         ": non-numeric cell '" + cell + "'");
    }
    out.push_back(v);
  }
  return out;
}

struct KeyArgs {
  std::string backend;
  unsigned bits = 3072;
  unsigned k = 256;

  AheBackend Backend() const {
    return backend.empty() ? AheBackendFromEnv() : ParseAheBackend(backend);
  }
  void Add(CLI::App* app) {
    app->add_option("--backend", backend,
                    "jl or paillier (default: $FEDREG_AHE_BACKEND or jl)");
    app->add_option("--bits", bits, "modulus bits (2048 or 3072)");
    app->add_option("--k", k, "plaintext ring bits");
  }
};

int RunKeygen(const KeyArgs& key, uint64_t seed, bool seeded,
              const std::string& out) {
  Csprng rng = seeded ? Csprng(seed, "cli/keygen") : Csprng();
  const AheKeyPair kp = AheKeygen(key.Backend(), key.bits, key.k, rng);
  const std::string blob = Base64Encode(SerializeKeyPair(kp));
  if (out.empty()) {
    std::cout << blob << '\n';
  } else {
    WriteFile(out, blob + "\n");
    WriteFile(out + ".pub", Base64Encode(SerializePublicKey(*kp.pk)) + "\n");
  }
  std::cerr << AheBackendName(kp.pk->backend()) << " key, "
            << kp.pk->modulus_bits() << "-bit modulus, k=" << kp.pk->k()
            << ", ciphertext " << kp.pk->ciphertext_bits() << " bits\n";
  return 0;
}

struct TrainArgs {
  std::string model = "linear";
  std::string dataset;
  unsigned users = 0;
  unsigned per_user = 0;
  unsigned rounds = 0;
  double eta = 0.1;
  double lambda = 0.0;
  unsigned tau = 16;
  unsigned threshold = 0;
  unsigned cohort = 0;
  unsigned epsilon = 0;
  double dropout = 0.0;
  std::string drop_point = "after-slg";
  double split = 0.7;
  uint64_t seed = 1;
  std::vector<std::string> columns;
  std::string report;
  std::string model_out;
  bool oracle = false;
};

int RunTrain(const TrainArgs& a, const KeyArgs& key) {
  ExperimentConfig cfg;
  cfg.train.kind = ParseModelKind(a.model);
  cfg.train.rounds =
      a.rounds ? a.rounds : (cfg.train.kind == ModelKind::kLogistic ? 300 : 350);
  cfg.train.eta = a.eta;
  cfg.train.lambda = a.lambda;
  cfg.train.fp = FpConfig{key.k, a.tau};
  cfg.train.modulus_bits = key.bits;
  cfg.train.backend = key.Backend();
  cfg.train.threshold = a.threshold;
  cfg.train.cohort = a.cohort;
  cfg.train.epsilon = a.epsilon;
  cfg.train.seed = a.seed;
  cfg.train.dropout.point = fedtrain::ParseDropPoint(a.drop_point);
  cfg.users = a.users;
  cfg.per_user = a.per_user;
  cfg.split = a.split;
  cfg.partition_seed = a.seed;
  cfg.dropout_fraction = a.dropout;
  cfg.run_oracle = a.oracle;

  CsvOptions csv;
  csv.keep = a.columns;
  const Dataset data = LoadCsv(a.dataset, csv);
  const ExperimentReport rep = RunExperiment(cfg, data);
  if (!a.report.empty()) {
    std::ofstream out(a.report);
    if (!out) throw Error(ErrorCode::kConfig, "cannot write " + a.report);
    WriteReport(out, rep);
  }
  std::cout << "dataset " << a.dataset << ": n=" << data.features()
            << " d=" << data.size() << '\n';
  WriteSummaryTable(std::cout, rep);
  if (!rep.result.ok()) {
    std::cerr << "protocol abort: "
              << fedtrain::AbortReasonName(rep.result.abort) << " ("
              << rep.result.abort_detail << ")\n";
    return kExitAbort;
  }
  if (!a.model_out.empty()) {
    WriteFile(a.model_out, ModelToJson(ToSavedModel(cfg, rep.result)) + "\n");
  }
  return 0;
}

int RunPredict(const std::string& model_file, const std::string& input,
               const KeyArgs& key, bool show_wire) {
  const SavedModel model = ModelFromJson(ReadFile(model_file));
  const std::vector<double> raw = ParseRow(input);
  if (raw.size() != model.mu.size()) {
    throw Error(ErrorCode::kDimension,
                "input has " + std::to_string(raw.size()) +
                    " values, model expects " + std::to_string(model.mu.size()));
  }
  std::vector<double> x(raw.size());
  for (size_t j = 0; j < x.size(); ++j) {
    x[j] = (raw[j] - model.mu[j]) / model.sigma[j];
  }
  const FpConfig fp{model.k, model.tau};
  const slg::SigmoidCubic sig = slg::FitSigmoidCubic();
  Csprng user_rng;
  Csprng server_rng;
  AheKeyPair keys = AheKeygen(key.Backend(), key.bits, fp.k, user_rng);
  oblivpred::PredictionClient client(keys, fp, sig, user_rng);
  oblivpred::PredictionServer server(model.theta, fp, sig, server_rng);

  const AhePublicKey& pk = *keys.pk;
  auto wire = [&](const char* dir, const std::string& json) {
    if (show_wire) std::cerr << dir << ' ' << json << '\n';
  };
  // Every message crosses the JSON wire format.
  auto req = oblivpred::RequestFromJson(
      oblivpred::RequestToJson(client.Request(x, 1), pk));
  wire(">", oblivpred::RequestToJson(req, pk));
  double value = 0;
  if (model.kind == ModelKind::kLogistic) {
    auto masked = server.Mask(req);
    wire("<", oblivpred::MaskedToJson(masked, pk));
    masked = oblivpred::MaskedFromJson(oblivpred::MaskedToJson(masked, pk), pk);
    auto assist = client.Assist(masked);
    wire(">", oblivpred::AssistToJson(assist, pk));
    assist = oblivpred::AssistFromJson(oblivpred::AssistToJson(assist, pk), pk);
    auto resp = server.Unmask(assist);
    wire("<", oblivpred::ResponseToJson(resp, pk));
    value = client.DecodeLogistic(
        oblivpred::ResponseFromJson(oblivpred::ResponseToJson(resp, pk), pk));
  } else {
    auto resp = server.Linear(req);
    wire("<", oblivpred::ResponseToJson(resp, pk));
    value = client.DecodeLinear(
        oblivpred::ResponseFromJson(oblivpred::ResponseToJson(resp, pk), pk));
  }
  std::cout << value << '\n';
  return 0;
}

int RunBench(const std::string& target, const KeyArgs& key,
             std::vector<unsigned> ns, std::vector<unsigned> ms,
             std::vector<unsigned> ds, double dropout, const std::string& model,
             uint64_t seed, bool csv) {
  bench::Table table;
  if (target == "he") {
    if (ns.empty()) ns = {10, 20, 30, 40, 50};
    table = bench::He(key.Backend(), key.bits, key.k, ns, seed);
  } else if (target == "agg") {
    if (ms.empty()) ms = {50, 100, 150, 200, 250};
    table = bench::Agg(ms, dropout, 10, key.k, seed);
  } else if (target == "slg") {
    if (ns.empty()) ns = {1, 5, 10, 20};
    if (ds.empty()) ds = {1, 5, 10};
    table = bench::Slg(ParseModelKind(model), ns, ds, key.Backend(), key.bits,
                       key.k, seed);
  } else {
    throw Error(ErrorCode::kConfig, "bench target must be he, agg or slg");
  }
  if (csv) {
    bench::PrintCsv(std::cout, table);
  } else {
    bench::PrintTable(std::cout, table);
  }
  return target == "he" || bench::AllMatch(table) ? 0 : 1;
}

int RunLeakageDemo(unsigned n, uint64_t seed, const KeyArgs& key) {
  Csprng rng(seed, "cli/leakage");
  LocalDataset one;
  std::vector<double> x(n);
  for (auto& v : x) v = 4 * rng.Uniform01() - 2;
  one.x.push_back(x);
  one.y.push_back(4 * rng.Uniform01() - 2);
  Model theta(n + 1);
  for (auto& v : theta) v = 2 * rng.Uniform01() - 1;

  // Unprotected local gradient.
  double e = theta[0] - one.y[0];
  for (unsigned j = 0; j < n; ++j) e += theta[j + 1] * x[j];
  std::vector<double> omega(n + 1, e);
  for (unsigned j = 0; j < n; ++j) omega[j + 1] = e * x[j];

  std::cout << "private x:          ";
  for (double v : x) std::cout << ' ' << v;
  std::cout << "\nfrom plain gradient:";
  if (auto rec = fedtrain::LeakageDemo(omega)) {
    for (double v : *rec) std::cout << ' ' << v;
  } else {
    std::cout << " (omega_0 = 0, nothing recovered)";
  }

  // The same attack on the server's share s of a real SLG run.
  const FpConfig fp{key.k, 16};
  const AheKeyPair keys = AheKeygen(key.Backend(), key.bits, key.k, rng);
  HeEvaluator server_ev(*keys.pk, rng);
  Csprng user_rng(seed, "cli/leakage/user");
  HeEvaluator user_ev(*keys.pk, user_rng);
  const auto shares = slg::LinSlg(
      user_ev, slg::EncodeDataset(one, ModelKind::kLinear, fp),
      server_ev.Encrypt(slg::EncodeModel(theta, fp)), fp.ring());
  RingVector s(n + 1);
  for (unsigned j = 0; j <= n; ++j) {
    s[j] = server_ev.Decrypt(*keys.sk, shares.enc_server_share[j]);
  }
  const std::vector<double> s_dec =
      slg::DecodeGradient(s, ModelKind::kLinear, fp);
  std::cout << "\nfrom share s alone: ";
  if (auto rec = fedtrain::LeakageDemo(s_dec)) {
    for (double v : *rec) std::cout << ' ' << v;
  } else {
    std::cout << " (nothing recovered)";
  }
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated regression training with secure aggregation"};
  app.require_subcommand(1);

  KeyArgs key;
  uint64_t seed = 1;

  auto* keygen = app.add_subcommand("keygen", "generate an AHE keypair");
  std::string key_out;
  key.Add(keygen);
  keygen->add_option("--seed", seed, "deterministic seed");
  keygen->add_option("--out", key_out, "output file (public key to OUT.pub)");

  auto* train = app.add_subcommand("train", "train over a CSV dataset");
  TrainArgs ta;
  key.Add(train);
  train->add_option("--model", ta.model, "linear, ridge or logistic")
      ->check(CLI::IsMember({"linear", "ridge", "logistic"}));
  train->add_option("--dataset", ta.dataset, "CSV file, last column label")
      ->required();
  train->add_option("--users", ta.users, "number of users m")->required();
  train->add_option("--per-user", ta.per_user, "points per user")->required();
  train->add_option("--rounds", ta.rounds, "rounds (default 350, logistic 300)");
  train->add_option("--eta", ta.eta, "learning rate");
  train->add_option("--lambda", ta.lambda, "ridge regularization");
  train->add_option("--tau", ta.tau, "fixed-point precision bits");
  train->add_option("--threshold", ta.threshold, "t (default ceil(m/3))");
  train->add_option("--cohort", ta.cohort, "M (default 2t)");
  train->add_option("--epsilon", ta.epsilon, "aggregate privacy (default t*l)");
  train->add_option("--dropout-frac", ta.dropout, "dropouts per round / M");
  train->add_option("--drop-point", ta.drop_point,
                    "before-slg, after-slg, after-share-keys, "
                    "after-masked-input");
  train->add_option("--split", ta.split, "training fraction");
  train->add_option("--columns", ta.columns, "feature columns to keep")
      ->delimiter(',');
  train->add_option("--seed", ta.seed, "seed");
  train->add_option("--report", ta.report, "JSON-lines report path");
  train->add_option("--model-out", ta.model_out, "write the model as JSON");
  train->add_flag("--oracle", ta.oracle, "also run the plaintext oracle");

  auto* predict = app.add_subcommand("predict", "oblivious prediction");
  std::string model_file;
  std::string input;
  bool show_wire = false;
  key.Add(predict);
  predict->add_option("--model-file", model_file, "model JSON")->required();
  predict->add_option("--input", input, "comma separated feature row")
      ->required();
  predict->add_flag("--show-wire", show_wire, "print the JSON messages");

  auto* bench_cmd = app.add_subcommand("bench", "timing and counter tables");
  std::string target;
  std::vector<unsigned> ns;
  std::vector<unsigned> ms;
  std::vector<unsigned> ds;
  double bench_dropout = 0.25;
  std::string bench_model = "linear";
  bool csv = false;
  key.Add(bench_cmd);
  bench_cmd->add_option("target", target, "he, agg or slg")
      ->required()
      ->check(CLI::IsMember({"he", "agg", "slg"}));
  bench_cmd->add_option("--n", ns, "feature counts")->delimiter(',');
  bench_cmd->add_option("--m", ms, "user counts")->delimiter(',');
  bench_cmd->add_option("--d", ds, "points per user")->delimiter(',');
  bench_cmd->add_option("--dropout", bench_dropout, "dropout fraction");
  bench_cmd->add_option("--model", bench_model, "linear or logistic");
  bench_cmd->add_option("--seed", seed, "seed");
  bench_cmd->add_flag("--csv", csv, "CSV output");

  auto* leak = app.add_subcommand("leakage-demo",
                                  "recover a single point from its gradient");
  unsigned leak_n = 5;
  key.Add(leak);
  leak->add_option("--n", leak_n, "features");
  leak->add_option("--seed", seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*keygen) {
      return RunKeygen(key, seed, keygen->count("--seed") > 0, key_out);
    }
    if (*train) return RunTrain(ta, key);
    if (*predict) return RunPredict(model_file, input, key, show_wire);
    if (*bench_cmd) {
      return RunBench(target, key, ns, ms, ds, bench_dropout, bench_model,
                      seed, csv);
    }
    if (*leak) return RunLeakageDemo(leak_n, seed, key);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
