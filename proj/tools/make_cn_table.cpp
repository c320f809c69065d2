// Writes the synthetic color-name lookup table (32768 x 10 float32, little endian).

#include <iostream>

#include "uhpsot/features.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <output.bin>\n";
    return 2;
  }
  try {
    uhpsot::CNTable::synthesize().save(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
