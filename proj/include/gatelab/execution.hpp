#pragma once

namespace gatelab {

// Selects between the serial reference kernels and their OpenMP
// counterparts. Both paths produce bitwise-identical results.
struct Execution {
  int threads = 1;

  static Execution serial() { return Execution{1}; }
  // threads <= 0 means "let the OpenMP runtime decide".
  static Execution parallel(int threads = 0) { return Execution{threads <= 0 ? 0 : threads}; }

  bool is_serial() const { return threads == 1; }
};

}  // namespace gatelab
