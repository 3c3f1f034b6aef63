#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace hawkesvol::cli {

// Command tree; subcommand callbacks write their primary output to `out`.
std::unique_ptr<CLI::App> build_app(std::ostream& out);

// args excludes the program name. Returns the process exit status; failures print one line to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hawkesvol::cli
