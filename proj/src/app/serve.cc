// Copyright 2026 The madseg Authors.
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

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <chrono>
#include <ostream>
#include <thread>

#include "madseg/annotate.h"
#include "madseg/app.h"
#include "madseg/error.h"
#include "madseg/text.h"

namespace madseg::app {

void CmdServe(const ServeOptions& options, std::ostream& log) {
  options.ranking.Validate();
  const Manifest manifest = Manifest::Load(options.manifest);
  const MadSet mad = MadSet::FromJsonLines(ReadFile(options.madset));
  if (mad.empty()) throw InvalidArgument("MAD set " + options.madset.string() + " is empty");
  const auto stores = manifest.Stores();

  // Assets are checked up front so a broken workspace fails before binding.
  for (const auto& r : mad.records()) {
    for (const auto& store : stores) {
      if ((store.model_id() == r.defender || store.model_id() == r.attacker) &&
          !store.Contains(r.image_id)) {
        throw NotFound("prediction of model '" + store.model_id() + "' for image '" +
                       r.image_id + "' is unreadable");
      }
    }
  }

  annotate::AssetResolver assets;
  const fs::path corpus_root = manifest.corpus_root;
  assets.image = [corpus_root](const std::string& image_id) {
    return corpus_root / (image_id + ".png");
  };
  assets.prediction = [&stores](const std::string& model_id, const std::string& image_id) {
    for (const auto& s : stores) {
      if (s.model_id() == model_id) return s.PathFor(image_id);
    }
    return fs::path();
  };

  annotate::Session session(mad, {options.seed, options.repeats}, options.log);
  annotate::AnnotationServer server(session, assets, manifest.model_ids(), options.ranking,
                                    options.static_dir);

  // Signals are taken synchronously by a watcher thread, which may then call
  // Stop() safely.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGUSR1);
  const int port = server.Bind(options.host, options.port);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  log << "listening on http://" << options.host << ":" << port << std::endl;

  std::atomic<bool> finished{false};
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    // Stop() is a no-op until the listener is up, so keep asking.
    while (!finished) {
      server.Stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  });
  server.Run();
  finished = true;
  pthread_kill(watcher.native_handle(), SIGUSR1);
  watcher.join();
  log << "served " << session.GetProgress().total_choices << " choices; log at "
      << options.log.string() << std::endl;
}

}  // namespace madseg::app
