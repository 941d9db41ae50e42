// Copyright 2026 The JNDQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <csignal>
#include <ostream>
#include <thread>

#include <pthread.h>

#include <fmt/format.h>

#include "commands.hpp"
#include "jndq/cli.hpp"
#include "jndq/error.hpp"
#include "jndq/service.hpp"

namespace jndq::cli {
namespace fs = std::filesystem;

int cmd_serve(const ServeOptions& o, Streams io) {
  const fs::path manifest = resolve_path(o.manifest);
  if (!fs::exists(manifest)) throw Error(ErrorCode::kMissingStimuli, "manifest not found: " + manifest.string());
  if (o.session_ttl_s <= 0) throw Error(ErrorCode::kInvalidArgument, "--session-ttl must be positive");
  if (o.snapshot_every <= 0) throw Error(ErrorCode::kInvalidArgument, "--snapshot-every must be positive");

  // Signals are blocked before any worker thread exists so that only the
  // waiter below ever receives them.
  sigset_t set, old;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGUSR1);
  pthread_sigmask(SIG_BLOCK, &set, &old);
  struct MaskRestore {
    sigset_t* old;
    ~MaskRestore() { pthread_sigmask(SIG_SETMASK, old, nullptr); }
  } restore{&old};

  service::ServiceOptions opts;
  opts.data_dir = resolve_path(o.data_dir);
  opts.manifest_path = manifest;
  opts.gate_on_fail = o.gate_on_fail;
  opts.session_ttl = std::chrono::seconds(o.session_ttl_s);
  opts.snapshot_every = static_cast<std::size_t>(o.snapshot_every);
  service::SessionStore store(opts);
  service::ApiServer server(store);

  const int port = server.bind(o.host, o.port);
  if (port < 0) throw Error(ErrorCode::kIo, fmt::format("cannot bind {}:{}", o.host, o.port));
  if (!o.port_file.empty()) {
    const fs::path pf = resolve_path(o.port_file);
    const fs::path tmp = pf.string() + ".tmp";
    write_text(tmp, fmt::format("{}\n", port));
    fs::rename(tmp, pf);
  }
  io.out << fmt::format("listening on http://{}:{}/v1 ({} sessions loaded)\n", o.host, port,
                        store.session_ids().size())
         << std::flush;

  std::thread waiter([&server, &set] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  const bool ok = server.listen();
  pthread_kill(waiter.native_handle(), SIGUSR1);
  waiter.join();
  io.out << "stopped\n";
  return ok ? 0 : kExitRuntime;
}

}  // namespace jndq::cli
