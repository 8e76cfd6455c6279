// Writes the generated corpus as .sdl files into the given directory.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "corpus.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: dump_corpus DIR\n";
    return 64;
  }
  std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  for (const auto& e : paa::testing::corpus()) std::ofstream(dir / (e.name + ".sdl")) << e.source;
  return 0;
}
