// Chat view: start a session on the policy-chosen photo, exchange text
// messages, and walk the new-photo offer or farewell at the end.

import { ApiClient, ApiError, ProposalDto, SessionStartDto } from "../api.js";
import { banner, clear, el } from "../dom.js";

interface ChatState {
  session: SessionStartDto | null;
  ended: boolean;
}

export function renderChat(root: HTMLElement, client: ApiClient, userId: string | null): void {
  clear(root);
  root.append(el("h2", {}, ["Chat"]));
  if (!userId) {
    root.append(el("p", { class: "hint" }, ["Create or pick a user in the portal first."]));
    return;
  }

  const notices = el("div", { class: "notices" });
  const photoPane = el("div", { class: "chat-photo" });
  const messages = el("div", { class: "chat-messages" });
  const input = el("input", {
    class: "chat-input",
    placeholder: "Type a reply",
    name: "message",
  });
  const send = el("button", { type: "submit", class: "chat-send" }, ["Send"]);
  const composer = el("form", { class: "chat-composer" }, [input, send]);
  const controls = el("div", { class: "chat-controls" });
  const start = el("button", { type: "button", class: "chat-start" }, ["Start Chatting"]);
  const endButton = el("button", { type: "button", class: "chat-end" }, ["End session"]);

  const state: ChatState = { session: null, ended: false };

  function setComposerEnabled(enabled: boolean): void {
    if (enabled) {
      input.removeAttribute("disabled");
      send.removeAttribute("disabled");
    } else {
      input.setAttribute("disabled", "disabled");
      send.setAttribute("disabled", "disabled");
    }
  }

  function addBubble(role: "chatbot" | "elderly" | "system", text: string): void {
    messages.append(el("div", { class: `bubble bubble-${role}` }, [text]));
  }

  function showPhoto(description: string, photoId: string): void {
    clear(photoPane);
    photoPane.append(el("p", { class: "photo-caption", "data-photo-id": photoId }, [description]));
    void client.photoImage(photoId).then((blob) => {
      if (!blob || typeof URL.createObjectURL !== "function") return;
      const img = el("img", { class: "photo-img", alt: description });
      img.src = URL.createObjectURL(blob);
      photoPane.prepend(img);
    });
  }

  function beginSession(photoId?: string): void {
    clear(messages);
    state.ended = false;
    client
      .startSession(userId as string, photoId)
      .then((session) => {
        state.session = session;
        showPhoto(session.photo.description, session.photo.photo_id);
        addBubble("chatbot", session.opening_question);
        setComposerEnabled(true);
      })
      .catch((err) => notices.append(apiBanner(err)));
  }

  function renderOffer(proposal: ProposalDto): void {
    const accept = el("button", { type: "button", class: "offer-accept" }, ["Yes, show me"]);
    const decline = el("button", { type: "button", class: "offer-decline" }, ["Not now"]);
    const offer = el("div", { class: "offer" }, [
      el("p", {}, [`Next photo: ${proposal.description}`]),
      accept,
      decline,
    ]);
    accept.addEventListener("click", () => {
      offer.remove();
      void client.endSession(state.session!.session_id).then(() => beginSession(proposal.photo_id));
    });
    decline.addEventListener("click", () => {
      offer.remove();
      void client.endSession(state.session!.session_id).then(() => {
        state.ended = true;
        addBubble("system", "Session ended. The chat summary is ready in the portal.");
        setComposerEnabled(false);
      });
    });
    messages.append(offer);
  }

  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text || !state.session || state.ended) return; // empty sends are blocked client-side
    addBubble("elderly", text);
    input.value = "";
    setComposerEnabled(false);
    client
      .sendMessage(state.session.session_id, text)
      .then((reply) => {
        addBubble("chatbot", reply.message);
        if (reply.effect === "OFFER_NEW_PHOTO" && reply.proposal) {
          renderOffer(reply.proposal);
        } else if (reply.effect === "FAREWELL" || reply.phase === "ENDED") {
          state.ended = true;
          addBubble("system", "The chatbot said goodbye. See the portal for the summary.");
        } else {
          setComposerEnabled(true);
        }
        if (state.ended) setComposerEnabled(false);
      })
      .catch((err) => {
        if (err instanceof ApiError && err.status === 410) {
          state.ended = true;
          addBubble("system", "This session has ended.");
          setComposerEnabled(false);
          return;
        }
        if (err instanceof ApiError && err.status === 502) {
          notices.append(banner("error", "The assistant is unavailable, please try again."));
          setComposerEnabled(true); // session is preserved server-side
          return;
        }
        notices.append(apiBanner(err));
        setComposerEnabled(true);
      });
  });

  start.addEventListener("click", () => beginSession());
  endButton.addEventListener("click", () => {
    if (!state.session) return;
    void client
      .endSession(state.session.session_id)
      .then(() => {
        state.ended = true;
        addBubble("system", "Session ended.");
        setComposerEnabled(false);
      })
      .catch((err) => notices.append(apiBanner(err)));
  });

  controls.append(start, endButton);
  setComposerEnabled(false);
  root.append(notices, controls, photoPane, messages, composer);
}

function apiBanner(err: unknown): HTMLElement {
  if (err instanceof ApiError) {
    return banner("error", `${err.code}: ${err.message}`);
  }
  return banner("error", String(err));
}
