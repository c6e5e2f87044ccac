#ifndef SIMCAL_EXTERNAL_BACKEND_HPP
#define SIMCAL_EXTERNAL_BACKEND_HPP

// Wires an out-of-process simulator behind the Backend interface. One
// process per request: the request is a single JSON line on stdin,
//   {"backend": name, "scene": <scene>, "params": {<name>: <value>, ...}}
// and the reply a single JSON line on stdout in the SimResult form
//   {"status": "ok", "wrist": [[t,x,y,z,qx,qy,qz,qw], ...], "object_final": [x,y,z] | null}.
// A non-zero exit, a missing line or malformed JSON is reported as a
// non-finite result so the optimizer maps it to the penalty fitness.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <string>
#include <utility>
#include <vector>

#include "simcal/serialization.hpp"
#include "simcal/simkit.hpp"

namespace simcal {

inline std::string make_external_request(const std::string& backend, const SceneSpec& scene,
                                         const PhysicsParams& params) {
  json req{{"backend", backend}, {"scene", to_json(scene)}, {"params", to_json(to_assignment(params, scene))}};
  return req.dump() + "\n";
}

inline SimResult parse_external_response(const std::string& line) {
  const json j = json::parse(line);
  return sim_result_from_json(j);
}

namespace detail {

/// Runs argv with `input` on stdin; returns (exit status, stdout).
inline std::pair<int, std::string> run_process(const std::vector<std::string>& argv, const std::string& input) {
  int to_child[2], from_child[2];
  if (pipe(to_child) != 0) throw Error("pipe failed");
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw Error("pipe failed");
  }
  const pid_t pid = fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  // Ignore SIGPIPE while writing in case the child exits without reading.
  auto* previous = std::signal(SIGPIPE, SIG_IGN);
  std::size_t written = 0;
  while (written < input.size()) {
    const ssize_t n = write(to_child[1], input.data() + written, input.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    written += static_cast<std::size_t>(n);
  }
  close(to_child[1]);
  std::signal(SIGPIPE, previous);
  std::string output;
  char buf[4096];
  for (;;) {
    const ssize_t n = read(from_child[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  close(from_child[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::move(output)};
}

}  // namespace detail

class ExternalBackend final : public Backend {
 public:
  /// `defaults` are the generic settings reported for baseline runs.
  ExternalBackend(std::string name, std::vector<std::string> argv, PhysicsParams defaults = {})
      : name_(std::move(name)), argv_(std::move(argv)), defaults_(std::move(defaults)) {
    if (argv_.empty()) throw ConfigError("external backend '" + name_ + "' needs a command");
  }

  std::string name() const override { return name_; }

  PhysicsParams generic_params(const SceneSpec& scene) const override {
    PhysicsParams p = defaults_;
    p.link_mass = scene.link_masses;
    p.gripper_mass = scene.gripper_mass;
    if (scene.object) p.object_mass = scene.object->nominal_mass;
    return p;
  }

  SimResult simulate(const SceneSpec& scene, const PhysicsParams& params) const override {
    const auto [code, out] = detail::run_process(argv_, make_external_request(name_, scene, params));
    SimResult failed;
    failed.status = SimStatus::NonFinite;
    if (code != 0) return failed;
    const auto eol = out.find('\n');
    try {
      return parse_external_response(out.substr(0, eol));
    } catch (const std::exception&) {
      return failed;
    }
  }

 private:
  std::string name_;
  std::vector<std::string> argv_;
  PhysicsParams defaults_;
};

}  // namespace simcal

#endif  // SIMCAL_EXTERNAL_BACKEND_HPP
