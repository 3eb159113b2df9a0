// Connection settings and the selected user, persisted across reloads.

import type { ApiSettings } from "./api.js";

const SETTINGS_KEY = "photochat.settings";
const USER_KEY = "photochat.currentUser";

export function loadSettings(): ApiSettings {
  try {
    const raw = localStorage.getItem(SETTINGS_KEY);
    if (raw) return JSON.parse(raw) as ApiSettings;
  } catch {
    // fall through to defaults
  }
  return { baseUrl: "" };
}

export function saveSettings(settings: ApiSettings): void {
  localStorage.setItem(SETTINGS_KEY, JSON.stringify(settings));
}

export function loadCurrentUser(): string | null {
  return localStorage.getItem(USER_KEY);
}

export function saveCurrentUser(userId: string): void {
  localStorage.setItem(USER_KEY, userId);
}
