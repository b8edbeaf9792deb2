#include "hubflow/error.hpp"

namespace hubflow {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string msg = "validation failed";
  for (const auto& issue : issues) msg += "; " + issue;
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace hubflow
