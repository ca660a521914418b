#include "bsgame/common.hpp"

#include <cstdio>
#include <mutex>

namespace bsgame {

namespace {

std::mutex g_warn_mutex;

WarnHandler& handler_slot() {
  static WarnHandler handler = [](const std::string& message) {
    std::fprintf(stderr, "[bsgame] warning: %s\n", message.c_str());
  };
  return handler;
}

}  // namespace

void set_warn_handler(WarnHandler handler) {
  std::lock_guard lock(g_warn_mutex);
  handler_slot() = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warn_mutex);
  if (handler_slot()) handler_slot()(message);
}

}  // namespace bsgame
