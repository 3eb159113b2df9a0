// Caregiver portal: create a user, upload described photos with member
// tags, import text conversations, review summaries and transcripts.

import { ApiClient, ApiError, SummaryDto, UserDto } from "../api.js";
import { banner, chipList, clear, el } from "../dom.js";
import { saveCurrentUser } from "../config.js";

export interface PortalCallbacks {
  onUserSelected?: (userId: string) => void;
}

export function renderPortal(
  root: HTMLElement,
  client: ApiClient,
  userId: string | null,
  callbacks: PortalCallbacks = {},
): void {
  clear(root);
  root.append(el("h2", {}, ["Caregiver portal"]));
  const notices = el("div", { class: "notices" });
  root.append(notices);

  root.append(renderUserForm(client, notices, callbacks));

  if (userId) {
    const detail = el("div", { class: "user-detail" });
    root.append(detail);
    void refreshUserDetail(detail, client, notices, userId);
  } else {
    root.append(el("p", { class: "hint" }, ["Create a user to manage photos and summaries."]));
  }
}

function renderUserForm(
  client: ApiClient,
  notices: HTMLElement,
  callbacks: PortalCallbacks,
): HTMLElement {
  const name = el("input", { placeholder: "Display name", name: "display_name" });
  const background = el("textarea", {
    placeholder: "Background (history, demographics)",
    name: "background",
  });
  const family = el("textarea", {
    placeholder: "Family members, one per line: name, relationship",
    name: "family",
  });
  const submit = el("button", { type: "submit" }, ["Create user"]);
  const form = el("form", { class: "user-form" }, [
    el("h3", {}, ["New user"]),
    name,
    background,
    family,
    submit,
  ]);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const members = family.value
      .split("\n")
      .map((line) => line.trim())
      .filter(Boolean)
      .map((line) => {
        const [memberName, relationship = ""] = line.split(",").map((p) => p.trim());
        return { name: memberName ?? "", relationship };
      });
    client
      .createUser({
        display_name: name.value,
        background: background.value,
        family: members,
      })
      .then((user) => {
        saveCurrentUser(user.user_id);
        notices.append(banner("info", `Created user ${user.display_name} (${user.user_id})`));
        callbacks.onUserSelected?.(user.user_id);
      })
      .catch((err) => notices.append(apiBanner(err)));
  });
  return form;
}

async function refreshUserDetail(
  root: HTMLElement,
  client: ApiClient,
  notices: HTMLElement,
  userId: string,
): Promise<void> {
  let user: UserDto;
  try {
    user = await client.getUser(userId);
  } catch (err) {
    notices.append(apiBanner(err));
    return;
  }
  clear(root);

  const header = el("div", { class: "user-header" }, [
    el("h3", {}, [`${user.display_name}`]),
    el("p", { class: "user-id" }, [user.user_id]),
    el("p", {}, ["Likes: "]),
    chipList(user.profile.likes, "like"),
    el("p", {}, ["Dislikes: "]),
    chipList(user.profile.dislikes, "dislike"),
  ]);
  root.append(header);

  root.append(renderPhotoForm(client, notices, root, user));
  root.append(renderImportForm(client, notices, root, user));

  const gallery = el("div", { class: "photo-grid" });
  root.append(el("h3", {}, ["Photos"]));
  root.append(gallery);
  await renderGallery(gallery, client, notices, user.user_id);

  const summaries = el("div", { class: "summaries" });
  root.append(el("h3", {}, ["Chat summaries"]));
  root.append(summaries);
  await renderSummaries(summaries, client, notices, user.user_id);
}

function renderPhotoForm(
  client: ApiClient,
  notices: HTMLElement,
  detail: HTMLElement,
  user: UserDto,
): HTMLElement {
  const description = el("textarea", {
    placeholder: "Photo description",
    name: "description",
  });
  const fileInput = el("input", { type: "file", accept: "image/*", name: "image" });
  const checkboxes = user.family.map((member) => {
    const box = el("input", { type: "checkbox", value: member.name, name: "member" });
    return { box, label: el("label", { class: "member-choice" }, [box, member.name]) };
  });
  const submit = el("button", { type: "submit" }, ["Upload photo"]);
  const form = el("form", { class: "photo-form" }, [
    el("h3", {}, ["Add a photo"]),
    description,
    fileInput,
    el("div", { class: "member-choices" }, checkboxes.map((c) => c.label)),
    submit,
  ]);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!description.value.trim()) {
      notices.append(banner("error", "A description is required for every photo."));
      return;
    }
    const members = checkboxes.filter((c) => c.box.checked).map((c) => c.box.value);
    const image = fileInput.files?.[0];
    client
      .uploadPhoto(user.user_id, { description: description.value, members, image })
      .then(() => {
        notices.append(banner("info", "Photo uploaded."));
        void refreshUserDetail(detail, client, notices, user.user_id);
      })
      .catch((err) => notices.append(apiBanner(err)));
  });
  return form;
}

function renderImportForm(
  client: ApiClient,
  notices: HTMLElement,
  detail: HTMLElement,
  user: UserDto,
): HTMLElement {
  const text = el("textarea", {
    placeholder: "Paste a text conversation, one message per line",
    name: "import",
  });
  const submit = el("button", { type: "submit" }, ["Import conversation"]);
  const form = el("form", { class: "import-form" }, [
    el("h3", {}, ["Import messages"]),
    text,
    submit,
  ]);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const messages = text.value.split("\n").filter((line) => line.trim());
    client
      .importMessages(user.user_id, messages)
      .then(() => {
        notices.append(banner("info", "Conversation imported as a discussion topic."));
        void refreshUserDetail(detail, client, notices, user.user_id);
      })
      .catch((err) => notices.append(apiBanner(err)));
  });
  return form;
}

async function renderGallery(
  gallery: HTMLElement,
  client: ApiClient,
  notices: HTMLElement,
  userId: string,
): Promise<void> {
  clear(gallery);
  let photos;
  try {
    photos = await client.listPhotos(userId);
  } catch (err) {
    notices.append(apiBanner(err));
    return;
  }
  if (photos.length === 0) {
    gallery.append(el("p", { class: "hint" }, ["No photos yet."]));
    return;
  }
  for (const photo of photos) {
    const card = el("div", { class: "photo-card", "data-photo-id": photo.photo_id }, [
      el("p", { class: "photo-description" }, [photo.description]),
      el("p", { class: "photo-members" }, [
        photo.members_present.length ? `With: ${photo.members_present.join(", ")}` : "No tagged members",
      ]),
      el("p", { class: "photo-discussed" }, [
        photo.discussed_count
          ? `Discussed ${photo.discussed_count} time(s)`
          : "Not discussed yet",
      ]),
    ]);
    gallery.append(card);
  }
}

async function renderSummaries(
  container: HTMLElement,
  client: ApiClient,
  notices: HTMLElement,
  userId: string,
): Promise<void> {
  clear(container);
  let summaries: SummaryDto[];
  try {
    summaries = await client.listSummaries(userId);
  } catch (err) {
    notices.append(apiBanner(err));
    return;
  }
  if (summaries.length === 0) {
    container.append(el("p", { class: "hint" }, ["No chat summaries yet."]));
    return;
  }
  for (const record of summaries) {
    const card = el("div", { class: "summary-card", "data-summary-id": record.summary_id });
    if (record.unparsed) {
      card.append(el("p", { class: "summary-unparsed" }, ["Summary could not be parsed; raw text kept."]));
    } else {
      card.append(el("p", { class: "summary-text" }, [record.summary.summary_text]));
      card.append(el("p", {}, ["Likes: "]), chipList(record.summary.new_profile.likes, "like"));
      card.append(
        el("p", {}, ["Dislikes: "]),
        chipList(record.summary.new_profile.dislikes, "dislike"),
      );
      if (record.summary.target_person) {
        card.append(
          el("p", { class: "summary-target" }, [`Next photo should feature: ${record.summary.target_person}`]),
        );
      }
    }
    const viewButton = el("button", { type: "button", class: "view-transcript" }, [
      "View conversation",
    ]);
    const transcriptBox = el("div", { class: "transcript-box" });
    viewButton.addEventListener("click", () => {
      void client
        .getTranscript(record.session_id)
        .then((transcript) => {
          clear(transcriptBox);
          transcriptBox.append(renderTranscriptTable(transcript.rounds));
        })
        .catch((err) => notices.append(apiBanner(err)));
    });
    card.append(viewButton, transcriptBox);
    container.append(card);
  }
}

export function renderTranscriptTable(
  rows: { round: number; role: string; question: string; option: string; message: string }[],
): HTMLElement {
  const table = el("table", { class: "transcript" });
  const head = el("tr", {}, [
    el("th", {}, ["Round"]),
    el("th", {}, ["Role"]),
    el("th", {}, ["Question"]),
    el("th", {}, ["Agent Choice"]),
    el("th", {}, ["Message"]),
  ]);
  table.append(el("thead", {}, [head]));
  const body = el("tbody");
  for (const row of rows) {
    body.append(
      el("tr", { "data-round": String(row.round) }, [
        el("td", {}, [String(row.round)]),
        el("td", {}, [row.role]),
        el("td", {}, [row.question]),
        el("td", {}, [row.option]),
        el("td", {}, [row.message]),
      ]),
    );
  }
  table.append(body);
  return table;
}

function apiBanner(err: unknown): HTMLElement {
  if (err instanceof ApiError) {
    return banner("error", `${err.code}: ${err.message}`);
  }
  return banner("error", String(err));
}
