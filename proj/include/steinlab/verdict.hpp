#pragma once

#include <map>
#include <string>

namespace steinlab {

struct InequalityVerdict {
  std::string name;
  std::string case_label;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  double numeric_error = 0.0;
  bool holds = false;  // margin >= -numeric_error
  std::map<std::string, double> inputs;
};

InequalityVerdict verdict(const std::string& name, double lhs, double rhs, double numeric_error,
                          const std::string& case_label = "", std::map<std::string, double> inputs = {});

}  // namespace steinlab
