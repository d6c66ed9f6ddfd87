// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/log.hpp>

#include <iostream>

namespace nilm {

namespace {

WarningSink &sink() {
  static WarningSink s = [](const std::string &m) {
    std::cerr << "warning: " << m << '\n';
  };
  return s;
}

} // namespace

void warn(const std::string &message) {
  if (sink())
    sink()(message);
}

WarningSink set_warning_sink(WarningSink s) {
  auto previous = std::move(sink());
  sink() = std::move(s);
  return previous;
}

} // namespace nilm
