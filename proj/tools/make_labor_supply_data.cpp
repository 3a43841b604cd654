// Writes the bundled labor-supply shaped CSV.
//   make_labor_supply_data [seed] [path]

#include "lsqtobit/montecarlo.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  const std::string path = argc > 2 ? argv[2] : "labor_supply_synthetic.csv";
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot open " << path << '\n';
    return 1;
  }
  const auto sample = lsqtobit::make_labor_supply_sample(seed);
  lsqtobit::write_labor_supply_csv(out, sample);
  std::cout << path << ": " << sample.data.size() << " rows, " << sample.data.censored_count() << " censored\n";
  return 0;
}
