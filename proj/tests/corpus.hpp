#pragma once

#include <string>
#include <vector>

namespace testing {

/// Smooth expressions in n = 2 whose domain covers t ∈ [0, 1], |q|, |dq| ≤ 1.
inline const std::vector<std::string>& expression_corpus() {
  static const std::vector<std::string> corpus = {
      "q1",
      "q1^2",
      "q1*q2",
      "-k*q1",
      "sin(q1)",
      "cos(q2)*q1",
      "exp(t)*q1",
      "exp(-q1^2)",
      "log(2+q1)",
      "sqrt(3+q2)",
      "q1/(2+q2)",
      "(q1+q2)^3",
      "sin(q1)*cos(q2)",
      "t*q1-q2*t^2",
      "dq1^2",
      "dq1*dq2*q1",
      "sin(dq1)*q2",
      "exp(dq2/2)",
      "1/(1+q1^2)",
      "q1^2^1",
      "-(q1-q2)^2",
      "abs(q1)+3",
      "sqrt(1+dq1^2)",
      "log(1+q1^2+q2^2)",
      "cos(t*q1)",
      "sin(t)*q2+cos(t)*q1",
      "q1*exp(q2)*sin(t)",
      "(1+q1)/(1+q2^2)",
      "2^q1",
      "q1^3-3*q1*q2^2",
      "exp(sin(q1))",
      "cos(cos(q2))",
      "sqrt(2+sin(q1*q2))",
      "log(3+cos(t+q1))",
      "(dq1-q1)^2*t",
      "-sin(q1)-0.1*dq1^3",
      "q2/(1+exp(q1))",
      "t^2*dq2",
      "dq1*dq1-dq2*dq2",
      "1/(2+sin(dq1))",
      "exp(-t)*cos(q1)",
      "(q1+1)^(q2+2)",
      "sin(q1)^2+cos(q1)^2",
      "q1*q2*dq1*dq2",
      "-q1-0.5*dq1+0.1*q1^2*dq1",
      "sqrt(q1^2+q2^2+1)",
      "exp(q1)*exp(-q1)",
      "(t+1)/(q1+3)",
      "cos(dq1+dq2)*sin(q1-q2)",
      "q1^4/4-q2^4/4",
  };
  return corpus;
}

}  // namespace testing
