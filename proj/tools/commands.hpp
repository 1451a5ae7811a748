#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sse/synthgen.hpp"

namespace sse::cli {

struct Common {
  int threads = 0;
  std::string prompt;
};

struct IngestArgs {
  std::string manifest, semantic, visual, out, name;
};

struct SelectArgs {
  std::string dataset, out;
  std::uint32_t k = 300;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t max_iters = 100;
  double tol = 1e-4;
  std::uint32_t restarts = 4;
  std::string cluster_on = "semantic";
  std::string method = "sse";
  double fraction = 1.0;
  double rfs_t = 0.001;
  bool explain = false;
};

struct EnrichArgs {
  std::string selected, pool, out;
  std::optional<std::size_t> budget;
  std::optional<double> target_fraction;
  std::string anchor_policy = "dynamic";
  bool explain = false;
};

struct RetrieveArgs {
  std::string dataset, query, provider;
  std::size_t top = 10;
};

struct ReportArgs {
  std::string dataset, out;
  std::uint32_t k = 300;
  std::uint64_t seed = 0;
  std::uint32_t max_iters = 100;
  double tol = 1e-4;
  std::uint32_t restarts = 4;
  std::string cluster_on = "semantic";
  std::vector<double> epsilons = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3,
                                  0.35, 0.4, 0.45, 0.5, 0.55, 0.6};
  std::vector<std::uint32_t> ks;
  double epsilon = 0.1;
  bool csv = false;
};

struct SynthArgs {
  SynthSpec spec;
  std::string labels = "longtail";
  std::string out;
};

int run_ingest(const Common& c, const IngestArgs& a, std::ostream& out);
int run_select(const Common& c, const SelectArgs& a, std::ostream& out);
int run_enrich(const Common& c, const EnrichArgs& a, std::ostream& out);
int run_retrieve(const Common& c, const RetrieveArgs& a, std::ostream& out);
int run_report_retention(const Common& c, const ReportArgs& a, std::ostream& out);
int run_report_sessions(const Common& c, const ReportArgs& a, std::ostream& out);
int run_report_objects(const Common& c, const ReportArgs& a, std::ostream& out);
int run_report_ksweep(const Common& c, const ReportArgs& a, std::ostream& out);
int run_synth(const Common& c, const SynthArgs& a, std::ostream& out);

}  // namespace sse::cli
