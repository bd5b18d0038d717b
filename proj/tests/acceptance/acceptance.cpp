// One PASS/FAIL line per acceptance criterion; exits 1 if any failed.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fixtures/table4.hpp"
#include "json.hpp"
#include "mission/classifier.hpp"
#include "mission/detector.hpp"
#include "mission/diversity.hpp"
#include "mission/metrics.hpp"
#include "mission/pipeline.hpp"
#include "mission/synth.hpp"

using namespace mission;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

fs::path scratch_root() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() / ("mission-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path scratch(const std::string& name) {
  auto p = scratch_root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) out.require(false, "runtime " + fmt(secs) + " s over " + fmt(limit_s) + " s");
  if (!out.ok) ++failures;
  std::cout << (out.ok ? "PASS" : "FAIL") << " criterion " << id << " " << name << " (" << fmt(secs) << " s)";
  if (!out.detail.empty()) std::cout << ": " << out.detail;
  std::cout << std::endl;
}

double gini_pairwise(const std::vector<double>& x) {
  double num = 0.0, sum = 0.0;
  for (double a : x) {
    sum += a;
    for (double b : x) num += std::abs(a - b);
  }
  const double n = static_cast<double>(x.size());
  return sum == 0.0 ? 0.0 : num / (2.0 * n * n * (sum / n));
}

// Global topic average computed by streaming the TPV file twice: once to
// count rows, once to accumulate each row divided by the denominator.
std::vector<double> streaming_global_average(const fs::path& tpv_file, std::size_t k, std::size_t profiles,
                                             bool per_tweet) {
  std::size_t rows = 0;
  {
    std::ifstream in(tpv_file);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
  }
  const double denom = static_cast<double>(per_tweet ? rows : profiles);
  std::vector<double> avg(k, 0.0);
  std::ifstream in(tpv_file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto probs = json::parse(line).at("probs").get<std::vector<double>>();
    double s = 0.0;
    for (double p : probs) s += p;
    for (std::size_t i = 0; i < k; ++i) avg[i] += probs[i] / s / denom;
  }
  return avg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MISSION_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

RunConfig bundle_config(const fs::path& dir, const fs::path& out) {
  const json j = {{"inputs",
                   {{"tweets", "tweets.jsonl"},
                    {"profiles", "profiles.jsonl"},
                    {"tpv", "tpv.jsonl"},
                    {"toxicity", "toxicity_cache.jsonl"},
                    {"bots", "bot_cache.jsonl"},
                    {"catalog", "catalog.tsv"},
                    {"labels", "labels.csv"}}},
                  {"out", out.string()},
                  {"seed", 42},
                  {"k", 20},
                  {"detect", {{"groups", "all"}}}};
  return RunConfig::from_json(j.dump(), dir.string());
}

std::string tweet_line(const std::string& pid, const std::string& id, const std::string& text, int day) {
  char ts[32];
  std::snprintf(ts, sizeof ts, "2021-05-%02dT08:30:00Z", day);
  return json{{"tweet_id", id}, {"profile_id", pid}, {"text", text}, {"created_at", ts}}.dump() + "\n";
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);

  criterion(1, "entropy group boundaries", 1.0, [] {
    Outcome o;
    const auto& b = group_boundaries();
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(b[i] - std::log(i + 1.5)));
    o.require(worst <= 1e-12, "boundary error " + fmt(worst));
    o.require(assign_group(0.69) == Group::II, "H=0.69 not in group II");
    // 0.91 stands for ln 2.5 = 0.9163, the lower edge of group III
    o.require(assign_group(std::log(2.5)) == Group::III, "H=ln 2.5 not in group III");
    o.require(assign_group(1.25) == Group::III, "H=1.25 not in group III");
    if (o.ok)
      o.detail = "max |boundary - ln(i+1.5)| = " + fmt(worst) + ", 0.69 -> II, ln 2.5 -> III (literal 0.91 -> " +
                 group_name(assign_group(0.91)) + ")";
    return o;
  });

  criterion(2, "gini sorted form vs pairwise oracle", 10.0, [] {
    Outcome o;
    Rng rng(20240601);
    double worst = 0.0, worst_scale = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto n = static_cast<std::size_t>(rng.uniform_int(1, 200));
      std::vector<double> x(n);
      for (auto& v : x) v = rng.bernoulli(0.1) ? 0.0 : rng.uniform();
      const double g = gini_index(x);
      worst = std::max(worst, std::abs(g - gini_pairwise(x)));
      const double c = rng.uniform(0.01, 100.0);
      for (auto& v : x) v *= c;
      worst_scale = std::max(worst_scale, std::abs(gini_index(x) - g));
    }
    o.require(worst <= 1e-9, "oracle error " + fmt(worst));
    o.require(worst_scale <= 1e-9, "scale error " + fmt(worst_scale));
    if (o.ok) o.detail = "1000 vectors, max error " + fmt(worst) + ", scale drift " + fmt(worst_scale);
    return o;
  });

  criterion(3, "burstiness", 5.0, [] {
    Outcome o;
    std::vector<std::int64_t> periodic;
    for (int i = 0; i < 100; ++i) periodic.push_back(1'500'000'000 + 600 * i);
    const auto p = burstiness(periodic);
    o.require(p && std::abs(p->b + 1.0) <= 1e-9, "periodic series not -1");
    const double b10 = normalized_burstiness(1.0, 10);
    o.require(std::abs(b10 - 0.0733) <= 1e-4, "B(n=10, r=1) = " + fmt(b10));
    Rng rng(99);
    std::size_t checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const auto n = static_cast<std::size_t>(rng.uniform_int(3, 120));
      std::vector<std::int64_t> ts;
      std::int64_t t = 0;
      const int style = trial % 3;
      for (std::size_t i = 0; i < n; ++i) {
        if (style == 0) t += rng.uniform_int(0, 86400);
        else if (style == 1) t += rng.bernoulli(0.9) ? rng.uniform_int(0, 5) : rng.uniform_int(100000, 10000000);
        else t += 3600 + rng.uniform_int(-2, 2);
        ts.push_back(t);
      }
      if (auto r = burstiness(ts)) {
        ++checked;
        // burstiness() clamps, so check the unclamped formula too
        const double raw = normalized_burstiness(r->r_cv, r->n_events);
        if (!(r->b >= -1.0 && r->b <= 1.0) || !(raw >= -1.0 - 1e-12 && raw <= 1.0 + 1e-12)) {
          o.require(false, "B out of range: " + fmt(raw));
          break;
        }
      }
    }
    if (o.ok) o.detail = "B(10,1) = " + fmt(b10) + ", " + std::to_string(checked) + " fuzzed series in range";
    return o;
  });

  criterion(4, "readability hand examples", 0, [] {
    Outcome o;
    const auto c = text_counts("The cat sat on the mat.");
    const double fre = flesch_reading_ease(c);
    const double ari = automated_readability_index(c);
    std::string hundred;
    for (int i = 0; i < 100; ++i) hundred += "cat ";
    const double lw = linsear_write(text_counts(hundred));
    o.require(std::abs(fre - 116.145) <= 1e-6, "FRE = " + fmt(fre));
    o.require(std::abs(ari - (-5.085)) <= 1e-6, "ARI = " + fmt(ari));
    o.require(std::abs(lw - 50.0) <= 1e-6, "Linsear = " + fmt(lw));
    if (o.ok) o.detail = "FRE " + fmt(fre) + ", ARI " + fmt(ari) + ", Linsear " + fmt(lw);
    return o;
  });

  criterion(5, "nTPV sanity", 0, [] {
    Outcome o;
    // Single profile, per-tweet denominator.
    Rng rng(5);
    constexpr std::size_t k = 20;
    TpvMap tpvs;
    std::vector<const TopicVector*> mine;
    for (int i = 0; i < 40; ++i) {
      const std::vector<double> alpha(k, 0.3);
      auto v = rng.dirichlet(alpha);
      v[3] = 0.0;  // one unsupported topic
      double s = 0.0;
      for (double x : v) s += x;
      for (auto& x : v) x /= s;
      tpvs["t" + std::to_string(i)] = v;
    }
    for (const auto& [_, v] : tpvs) mine.push_back(&v);
    const auto g = global_topic_average(tpvs, tpvs.size());
    const auto n = ntpv(mine, g.values);
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if (g.values[i] > kGlobalAverageEpsilon) worst = std::max(worst, std::abs(n[i] - 1.0));
    o.require(worst <= 1e-9, "single-profile nTPV off by " + fmt(worst));

    // Seed-42 synthetic bundle against the streaming oracle.
    const auto dir = scratch("c5");
    const auto bundle = generate(default_synth_spec(100, 100), 42);
    bundle.write(dir.string());
    const auto loaded = load_tpvs((dir / "tpv.jsonl").string(), bundle.k);
    double worst_global = 0.0;
    for (bool per_tweet : {true, false}) {
      const auto lib = global_topic_average(loaded, per_tweet ? loaded.size() : bundle.labels.size());
      const auto oracle = streaming_global_average(dir / "tpv.jsonl", bundle.k, bundle.labels.size(), per_tweet);
      for (std::size_t i = 0; i < bundle.k; ++i)
        worst_global = std::max(worst_global, std::abs(lib.values[i] - oracle[i]));
    }
    o.require(worst_global <= 1e-9, "global average off by " + fmt(worst_global));
    if (o.ok)
      o.detail = "single-profile max |nTPV - 1| = " + fmt(worst) + ", global average vs oracle " + fmt(worst_global) +
                 " over " + std::to_string(loaded.size()) + " TPVs";
    return o;
  });

  criterion(6, "cluster designation fixture", 0, [] {
    Outcome o;
    const auto f = fixtures::table4();
    const auto r = detect_clusters(f.labels, f.aggregates, DetectionConfig{});
    const auto on = r.on_mission_count();
    const auto off = r.designations.size() - on;
    o.require(on == 96 && off == 72, std::to_string(on) + " on-mission, " + std::to_string(off) + " not");
    if (o.ok) o.detail = "96 on-mission, 72 not-on-mission";
    return o;
  });

  criterion(7, "classifier suite on the seed-42 bundle", 60.0, [] {
    Outcome o;
    const auto dir = scratch("c7");
    const auto bundle = generate(default_synth_spec(100, 100), 42);
    bundle.write(dir.string());
    const auto cfg = bundle_config(dir, dir / "out");
    const auto corpus = load_timelines(cfg.tweets, false);
    std::size_t longest = 0;
    for (const auto& [_, tl] : corpus.profiles) longest = std::max(longest, tl.tweets.size());
    o.require(corpus.profiles.size() == 200, "bundle has " + std::to_string(corpus.profiles.size()) + " profiles");
    o.require(longest <= 500, "a profile has " + std::to_string(longest) + " tweets");

    const auto res = run_pipeline(cfg);
    const auto& cls = res.report.at("classifier");
    o.require(cls.at("skipped").is_null(), "classification skipped");
    const auto& ev = cls.at("evaluation");
    const double f1 = ev.at("f1"), acc = ev.at("accuracy");
    o.require(f1 >= 0.95, "F1 " + fmt(f1));
    o.require(acc >= 0.95, "accuracy " + fmt(acc));

    // Confusion-matrix oracle on every reported cell.
    auto cell_ok = [](const json& c) {
      const double tp = c.at("tp"), tn = c.at("tn"), fp = c.at("fp"), fn = c.at("fn");
      const double f1_oracle = (2 * tp + fp + fn) == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
      const double acc_oracle = (tp + tn) / (tp + tn + fp + fn);
      return c.at("f1").get<double>() == f1_oracle && c.at("accuracy").get<double>() == acc_oracle &&
             f1_oracle >= 0.0 && f1_oracle <= 1.0;
    };
    o.require(cell_ok(ev), "held-out metrics disagree with the confusion matrix");
    std::size_t cells = 0;
    for (const auto& row : cls.at("ablation"))
      for (const char* m : {"svm", "tree", "forest"}) {
        ++cells;
        o.require(cell_ok(row.at(m)), std::string("ablation cell ") + row.at("features").get<std::string>() + "/" + m);
      }
    o.require(cells == 12, std::to_string(cells) + " ablation cells");

    // Recount the held-out confusion matrix from the saved model.
    const auto model = TrainedModel::load((dir / "out" / "model.json").string());
    const auto rows = load_features_jsonl((dir / "out" / "features.jsonl").string());
    const auto ls = labeled_set(rows, load_labels_csv(cfg.labels));
    const auto split = split_80_20(ls.y, derive_seed(cfg.seed, "split"), true);
    std::vector<int> truth, pred;
    for (auto i : split.test) {
      truth.push_back(ls.y[i]);
      pred.push_back(model.predict(ls.x[i]));
    }
    const auto recount = confusion_report(truth, pred);
    o.require(recount.tp == ev.at("tp").get<std::size_t>() && recount.tn == ev.at("tn").get<std::size_t>() &&
                  recount.fp == ev.at("fp").get<std::size_t>() && recount.fn == ev.at("fn").get<std::size_t>(),
              "saved model does not reproduce the reported confusion matrix");
    if (o.ok)
      o.detail = "held-out F1 " + fmt(f1) + ", accuracy " + fmt(acc) + " on " + std::to_string(split.test.size()) +
                 " profiles, 12 ablation cells";
    return o;
  });

  criterion(8, "determinism of two full runs", 0, [] {
    Outcome o;
    const auto dir = scratch("c8");
    o.require(run_cli("synth --seed 42 --out " + (dir / "bundle").string()) == 0, "synth failed");
    const auto config = (dir / "bundle" / "pipeline.json").string();
    o.require(run_cli("run --config " + config + " --out " + (dir / "a").string()) == 0, "first run failed");
    o.require(run_cli("run --config " + config + " --out " + (dir / "b").string()) == 0, "second run failed");
    for (const char* f : {"report.json", "model.json", "features.jsonl", "flagged.jsonl", "designations.json"}) {
      const auto a = slurp(dir / "a" / f);
      o.require(!a.empty(), std::string(f) + " missing");
      o.require(a == slurp(dir / "b" / f), std::string(f) + " differs");
    }
    if (o.ok) o.detail = "report.json and model.json byte-identical";
    return o;
  });

  criterion(9, "fleiss kappa", 0, [] {
    Outcome o;
    std::vector<std::vector<std::string>> unanimous;
    for (int i = 0; i < 30; ++i) unanimous.push_back(std::vector<std::string>(4, std::string(1, "abc"[i % 3])));
    const double k1 = fleiss_kappa(unanimous).kappa;
    o.require(k1 == 1.0, "unanimous kappa " + fmt(k1));
    Rng rng(42);
    std::vector<std::vector<std::string>> random;
    for (int i = 0; i < 2000; ++i) {
      std::vector<std::string> row;
      for (int r = 0; r < 5; ++r) row.push_back(std::string(1, "xyz"[rng.uniform_int(0, 2)]));
      random.push_back(row);
    }
    const double k0 = fleiss_kappa(random).kappa;
    o.require(std::abs(k0) <= 0.05, "random-rater kappa " + fmt(k0));
    if (o.ok) o.detail = "unanimous 1, random raters " + fmt(k0);
    return o;
  });

  criterion(10, "degenerate corpora", 0, [] {
    Outcome o;
    const std::string text = "the bus was late again so everyone walked to the market in the rain ";
    std::map<std::string, std::string> corpora;
    {
      std::string t;
      for (int i = 0; i < 12; ++i) t += tweet_line("only", "o" + std::to_string(i), text + std::to_string(i), i + 1);
      corpora["single profile"] = t;
    }
    {
      std::string t;
      for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 11; ++i)
          t += tweet_line("d" + std::to_string(p), "d" + std::to_string(p) + "x" + std::to_string(i), text, i + 1);
      corpora["all-duplicate tweets"] = t;
    }
    {
      std::string t;
      for (int p = 0; p < 5; ++p)
        for (int i = 0; i < 12; ++i)
          t += tweet_line("z" + std::to_string(p), "z" + std::to_string(p) + "x" + std::to_string(i),
                          text + "stop " + std::to_string(p * 31 + i), i + 1);
      corpora["zero hashtags"] = t;
    }
    std::string summary;
    int idx = 0;
    for (const auto& [name, tweets] : corpora) {
      const auto dir = scratch("c10-" + std::to_string(idx++));
      std::ofstream(dir / "tweets.jsonl") << tweets;
      // Neither toxicity nor bot scores are supplied.
      const json j = {{"inputs", {{"tweets", "tweets.jsonl"}}}, {"out", (dir / "out").string()}, {"k", 20},
                      {"detect", {{"groups", "all"}}}};
      try {
        const auto res = run_pipeline(RunConfig::from_json(j.dump(), dir.string()));
        o.require(!res.warnings.empty(), name + ": no warnings");
        o.require(fs::exists(dir / "out" / "report.json"), name + ": no report");
        summary += (summary.empty() ? "" : ", ") + name + " " + std::to_string(res.warnings.size()) + " warnings";
      } catch (const std::exception& e) {
        o.require(false, name + ": " + e.what());
      }
    }
    if (o.ok) o.detail = summary;
    return o;
  });

  std::error_code ec;
  fs::remove_all(scratch_root(), ec);
  return failures == 0 ? 0 : 1;
}
