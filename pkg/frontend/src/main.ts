// App shell: settings bar, hash routing between the portal and the chat.

import { ApiClient } from "./api.js";
import { loadCurrentUser, loadSettings, saveSettings } from "./config.js";
import { clear, el } from "./dom.js";
import { renderChat } from "./views/chat.js";
import { renderPortal } from "./views/portal.js";

export function mountApp(root: HTMLElement): void {
  const settings = loadSettings();
  let client = new ApiClient(settings);

  const nav = el("nav", { class: "nav" }, [
    el("a", { href: "#/portal" }, ["Portal"]),
    el("a", { href: "#/chat" }, ["Chat"]),
  ]);

  const baseUrlInput = el("input", {
    placeholder: "Service URL, e.g. http://localhost:8000",
    value: settings.baseUrl,
    name: "baseUrl",
  });
  const tokenInput = el("input", {
    placeholder: "API token (optional)",
    value: settings.token ?? "",
    name: "token",
  });
  const applyButton = el("button", { type: "submit" }, ["Apply"]);
  const settingsForm = el("form", { class: "settings" }, [baseUrlInput, tokenInput, applyButton]);
  settingsForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const next = { baseUrl: baseUrlInput.value.replace(/\/$/, ""), token: tokenInput.value || undefined };
    saveSettings(next);
    client = new ApiClient(next);
    route();
  });

  const outlet = el("main", { class: "outlet" });
  clear(root);
  root.append(el("header", {}, [el("h1", {}, ["photochat"]), nav, settingsForm]), outlet);

  function route(): void {
    const hash = window.location.hash || "#/portal";
    const userId = loadCurrentUser();
    if (hash.startsWith("#/chat")) {
      renderChat(outlet, client, userId);
    } else {
      renderPortal(outlet, client, userId, {
        onUserSelected: () => route(),
      });
    }
  }

  window.addEventListener("hashchange", route);
  route();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app") as HTMLElement);
}
