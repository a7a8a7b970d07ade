#include "bdss/trainer.hpp"

#include <cstdio>
#include <fstream>

namespace bdss {

std::string TrainLog::to_csv() const {
  std::string out = "iteration,epoch,lr,loss\n";
  char buf[96];
  for (std::size_t i = 0; i < iter_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%d,%.9g,%.9g\n", i, iter_epoch[i], iter_lr[i],
                  iter_loss[i]);
    out += buf;
  }
  return out;
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  const std::string csv = to_csv();
  out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace bdss
