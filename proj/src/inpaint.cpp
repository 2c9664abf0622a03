/* Copyright 2026 The parkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "parkit/inpaint.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <semaphore>
#include <thread>

#include "parkit/error.hpp"
#include "parkit/image_io.hpp"
#include "parkit/seed.hpp"

namespace parkit {

namespace fs = std::filesystem;

Image Inpainter::fill(const Image& image, const Mask& hole) const {
  require_same_shape(image, hole, "fill");
  if (hole.is_empty()) return image;
  const Image raw = generate(image, hole);
  require(raw.same_shape(image), ErrorCode::kBackend,
          kind() + " backend returned an image of the wrong size");
  return composite(raw, image, hole);
}

Image toy_diffusion_fill(const Image& image, const Mask& hole, int iters) {
  require_same_shape(image, hole, "toy_diffusion_fill");
  require(iters >= 0, ErrorCode::kInvalidArgument, "toy_diffusion_fill: iters must be >= 0");
  const std::size_t n_hole = area(hole);
  if (n_hole == 0) return image;
  require(n_hole < hole.pixel_count(), ErrorCode::kPrecondition,
          "toy_diffusion_fill: hole covers the whole frame, no boundary to diffuse from");
  const int w = image.width(), h = image.height();

  std::vector<int> index(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::pair<int, int>> px;
  px.reserve(n_hole);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (hole(x, y)) {
        index[static_cast<std::size_t>(y) * w + x] = static_cast<int>(px.size());
        px.emplace_back(x, y);
      }

  double mean[3] = {0, 0, 0};
  std::size_t n_ring = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (hole(x, y)) continue;
      const bool ring = (x > 0 && hole(x - 1, y)) || (x + 1 < w && hole(x + 1, y)) ||
                        (y > 0 && hole(x, y - 1)) || (y + 1 < h && hole(x, y + 1));
      if (!ring) continue;
      for (int c = 0; c < 3; ++c) mean[c] += image.channel(x, y, c);
      ++n_ring;
    }
  for (double& m : mean) m /= static_cast<double>(n_ring);

  std::vector<double> cur(px.size() * 3), next(px.size() * 3);
  for (std::size_t i = 0; i < px.size(); ++i)
    for (int c = 0; c < 3; ++c) cur[i * 3 + c] = mean[c];

  const int dx[4] = {-1, 1, 0, 0}, dy[4] = {0, 0, -1, 1};
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < px.size(); ++i) {
      const auto [x, y] = px[i];
      double sum[3] = {0, 0, 0};
      int count = 0;
      for (int d = 0; d < 4; ++d) {
        const int nx = x + dx[d], ny = y + dy[d];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const int j = index[static_cast<std::size_t>(ny) * w + nx];
        for (int c = 0; c < 3; ++c)
          sum[c] += j >= 0 ? cur[static_cast<std::size_t>(j) * 3 + c] : image.channel(nx, ny, c);
        ++count;
      }
      for (int c = 0; c < 3; ++c) next[i * 3 + c] = sum[c] / count;
    }
    cur.swap(next);
  }

  Image out = image;
  for (std::size_t i = 0; i < px.size(); ++i)
    for (int c = 0; c < 3; ++c)
      out.set_channel(px[i].first, px[i].second, c,
                      static_cast<std::uint8_t>(std::lround(std::clamp(cur[i * 3 + c], 0.0, 255.0))));
  return out;
}

ToyDiffusionInpainter::ToyDiffusionInpainter(int iters) : iters_(iters) {
  require(iters >= 0, ErrorCode::kInvalidArgument, "toy_diffusion iters must be >= 0");
}

Image ToyDiffusionInpainter::generate(const Image& image, const Mask& hole) const {
  return toy_diffusion_fill(image, hole, iters_);
}

Image oracle_fill(const Image& image, const Mask& hole, const Image& truth, double p,
                  std::uint64_t seed) {
  require_same_shape(image, hole, "oracle_fill");
  require_same_shape(image, truth, "oracle_fill truth");
  require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidArgument, "oracle_fill: p must be in [0,1]");
  const std::uint64_t stream = splitmix64(seed ^ content_hash(hole));
  Image out = image;
  for (int y = 0; y < hole.height(); ++y)
    for (int x = 0; x < hole.width(); ++x) {
      if (!hole(x, y)) continue;
      const auto idx = static_cast<std::uint64_t>(y) * hole.width() + x;
      const double u = static_cast<double>(splitmix64(stream + idx) >> 11) * 0x1.0p-53;
      out.set_pixel(x, y, u < p ? truth.pixel(x, y) : kMagenta);
    }
  return out;
}

OracleInpainter::OracleInpainter(double p, std::uint64_t seed, Image truth)
    : p_(p), seed_(seed), truth_(std::move(truth)) {
  require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidArgument, "oracle p must be in [0,1]");
}

Image OracleInpainter::generate(const Image& image, const Mask& hole) const {
  return oracle_fill(image, hole, truth_, p_, seed_);
}

struct ExternalCommandInpainter::Pool {
  explicit Pool(int n) : slots(n) {}
  std::counting_semaphore<> slots;
};

ExternalCommandInpainter::ExternalCommandInpainter(ExternalCommandConfig config)
    : config_(std::move(config)) {
  require(!config_.command.empty(), ErrorCode::kInvalidArgument, "external command is empty");
  require(config_.max_concurrent >= 1, ErrorCode::kInvalidArgument,
          "external command pool size must be >= 1");
  require(config_.timeout.count() > 0, ErrorCode::kInvalidArgument,
          "external command timeout must be positive");
  pool_ = std::make_unique<Pool>(config_.max_concurrent);
}

ExternalCommandInpainter::~ExternalCommandInpainter() = default;

namespace {

class ScratchDir {
 public:
  explicit ScratchDir(const std::optional<fs::path>& base) {
    static std::atomic<std::uint64_t> counter{0};
    const fs::path root = base ? *base : fs::temp_directory_path();
    path_ = root / ("parkit_ext_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct ChildResult {
  int status = 0;
  bool timed_out = false;
  std::string stderr_text;
};

ChildResult run_child(const std::vector<std::string>& argv, std::chrono::milliseconds timeout) {
  int err_pipe[2];
  require(::pipe2(err_pipe, O_CLOEXEC) == 0, ErrorCode::kBackend,
          std::string("pipe failed: ") + std::strerror(errno));
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    fail(ErrorCode::kBackend, std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(err_pipe[1], STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDOUT_FILENO);
    ::setpgid(0, 0);
    ::execvp(args[0], args.data());
    const std::string msg = std::string("exec failed: ") + std::strerror(errno) + "\n";
    [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg.data(), msg.size());
    ::_exit(127);
  }
  ::close(err_pipe[1]);

  ChildResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool open = true;
  char buf[4096];
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    if (open) {
      pollfd pfd{err_pipe[0], POLLIN, 0};
      const int r = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 50)));
      if (r > 0) {
        const ssize_t n = ::read(err_pipe[0], buf, sizeof(buf));
        if (n > 0) {
          if (result.stderr_text.size() < 65536) result.stderr_text.append(buf, static_cast<std::size_t>(n));
        } else {
          open = false;
        }
      }
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    const pid_t done = ::waitpid(pid, &result.status, WNOHANG);
    if (done == pid) {
      // Drain what is left in the pipe.
      ssize_t n;
      while (open && (n = ::read(err_pipe[0], buf, sizeof(buf))) > 0)
        if (result.stderr_text.size() < 65536) result.stderr_text.append(buf, static_cast<std::size_t>(n));
      ::close(err_pipe[0]);
      return result;
    }
  }
  ::kill(-pid, SIGKILL);
  ::kill(pid, SIGKILL);
  ::waitpid(pid, &result.status, 0);
  ::close(err_pipe[0]);
  return result;
}

std::string excerpt(const std::string& text) {
  constexpr std::size_t kMax = 2000;
  if (text.size() <= kMax) return text;
  return "..." + text.substr(text.size() - kMax);
}

}  // namespace

Image ExternalCommandInpainter::generate(const Image& image, const Mask& hole) const {
  pool_->slots.acquire();
  struct Release {
    Pool* p;
    ~Release() { p->slots.release(); }
  } release{pool_.get()};

  ScratchDir scratch(config_.scratch_dir);
  const fs::path in = scratch.path() / "image.png";
  const fs::path mask = scratch.path() / "mask.png";
  const fs::path out = scratch.path() / "out.png";
  write_image(in, image);
  write_mask(mask, hole);

  std::vector<std::string> argv = config_.command;
  argv.insert(argv.end(), {"--image", in.string(), "--mask", mask.string(), "--out", out.string()});
  const ChildResult r = run_child(argv, config_.timeout);
  if (r.timed_out)
    fail(ErrorCode::kTimeout, "external backend timed out after " +
                                  std::to_string(config_.timeout.count()) + " ms; stderr: " +
                                  excerpt(r.stderr_text));
  if (!WIFEXITED(r.status) || WEXITSTATUS(r.status) != 0) {
    const std::string how = WIFEXITED(r.status) ? "exit code " + std::to_string(WEXITSTATUS(r.status))
                                                : "signal " + std::to_string(WTERMSIG(r.status));
    fail(ErrorCode::kBackend, "external backend failed (" + how + "); stderr: " + excerpt(r.stderr_text));
  }
  Image result = [&] {
    try {
      return decode_image(read_file(out));
    } catch (const Error& e) {
      fail(ErrorCode::kBackend, std::string("external backend produced unreadable output: ") +
                                    e.what() + "; stderr: " + excerpt(r.stderr_text));
    }
  }();
  require(result.same_shape(image), ErrorCode::kBackend,
          "external backend output has size " + std::to_string(result.width()) + "x" +
              std::to_string(result.height()) + ", expected " + std::to_string(image.width()) +
              "x" + std::to_string(image.height()));
  return result;
}

std::unique_ptr<Inpainter> make_inpainter(const InpainterSpec& spec, std::optional<Image> truth) {
  if (spec.kind == "toy_diffusion") return std::make_unique<ToyDiffusionInpainter>(spec.iters);
  if (spec.kind == "oracle") {
    require(truth.has_value(), ErrorCode::kInvalidArgument, "oracle inpainter needs a truth image");
    return std::make_unique<OracleInpainter>(spec.p, spec.seed, std::move(*truth));
  }
  if (spec.kind == "external_command") return std::make_unique<ExternalCommandInpainter>(spec.external);
  fail(ErrorCode::kInvalidArgument, "unknown inpainter kind '" + spec.kind + "'");
}

}  // namespace parkit
