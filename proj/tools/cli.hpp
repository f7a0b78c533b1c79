#pragma once

// debatelab command line: run, analyze, aggregate, plotdata.

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "debatelab/http_gateway.hpp"

namespace debatelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitAborted = 2;

/// Hooks for tests: where HTTP traffic goes and how retries wait.
struct CliEnv {
  std::function<std::shared_ptr<HttpTransport>(const std::string& base_url, double timeout_seconds)>
      transport_factory;
  Sleeper sleeper;
};

/// `args` excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliEnv& env = {});

}  // namespace debatelab::cli
