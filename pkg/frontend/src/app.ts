// DOM bootstrap: binds the review session to the static page served by
// the verification service. All state transitions live in ReviewSession;
// this file only renders snapshots and forwards events.

import { ApiClient } from "./api.js";
import { suggest } from "./autocomplete.js";
import { ReviewSession, SessionState } from "./reviewLoop.js";
import { actionForKey, contextOf } from "./shortcuts.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const signinPanel = el<HTMLElement>("signin");
const signinForm = el<HTMLFormElement>("signin-form");
const annotatorInput = el<HTMLInputElement>("annotator-id");
const nativeCheckbox = el<HTMLInputElement>("native-signer");

const reviewPanel = el<HTMLElement>("review");
const wordLabel = el<HTMLElement>("word");
const confidenceLabel = el<HTMLElement>("confidence");
const progressLabel = el<HTMLElement>("progress");
const speedLabel = el<HTMLElement>("speed");
const video = el<HTMLVideoElement>("clip");
const mediaMissing = el<HTMLElement>("media-missing");
const correctionBox = el<HTMLElement>("correction-box");
const correctionInput = el<HTMLInputElement>("correction");
const correctionError = el<HTMLElement>("correction-error");
const suggestionList = el<HTMLUListElement>("suggestions");

const retryBanner = el<HTMLElement>("retry-banner");
const retryMessage = el<HTMLElement>("retry-message");
const statusLine = el<HTMLElement>("status");

const donePanel = el<HTMLElement>("done");
const doneStats = el<HTMLElement>("done-stats");

let session: ReviewSession | null = null;

function show(node: HTMLElement, visible: boolean): void {
  node.hidden = !visible;
}

function render(state: SessionState): void {
  show(signinPanel, false);
  show(reviewPanel, state.phase === "reviewing" || state.phase === "submitting" || state.phase === "retrying");
  show(donePanel, state.phase === "drained");
  show(retryBanner, state.phase === "retrying");

  switch (state.phase) {
    case "loading":
      statusLine.textContent = "loading next clip...";
      break;
    case "reviewing": {
      const { item, playbackRate, mediaMissing: missing } = state.view;
      wordLabel.textContent = item.word;
      confidenceLabel.textContent = `confidence ${item.confidence.toFixed(2)}`;
      progressLabel.textContent = `reviewed ${state.reviewed}`;
      speedLabel.textContent = playbackRate === 0.5 ? "0.5x" : "1x";
      statusLine.textContent = "Y correct / N incorrect / U unsure / Space replay / S speed";
      show(mediaMissing, missing);
      show(correctionBox, state.correcting);
      correctionError.textContent = state.correctionError ?? "";
      if (video.src !== new URL(item.media_url, location.href).href) {
        video.src = item.media_url;
      }
      video.playbackRate = playbackRate;
      if (state.correcting) {
        correctionInput.focus();
      } else {
        correctionInput.value = "";
        suggestionList.replaceChildren();
      }
      break;
    }
    case "submitting":
      statusLine.textContent = "submitting verdict...";
      break;
    case "retrying":
      retryMessage.textContent = `could not submit verdict (${state.error}); nothing was lost`;
      statusLine.textContent = "";
      break;
    case "drained": {
      const s = state.stats;
      doneStats.textContent =
        `queued ${s.queued} | correct ${s.verified_correct} | ` +
        `incorrect ${s.verified_incorrect} | unsure ${s.unsure} | ` +
        `you reviewed ${state.reviewed}`;
      break;
    }
    case "failed":
      statusLine.textContent = `service unreachable: ${state.error}`;
      show(reviewPanel, false);
      break;
  }
}

function renderSuggestions(): void {
  if (!session) {
    return;
  }
  const words = suggest(session.getVocabulary(), correctionInput.value);
  suggestionList.replaceChildren(
    ...words.map((word) => {
      const li = document.createElement("li");
      li.textContent = word;
      li.addEventListener("mousedown", (event) => {
        event.preventDefault();
        correctionInput.value = word;
        void session?.submitCorrection(word);
      });
      return li;
    }),
  );
}

signinForm.addEventListener("submit", (event) => {
  event.preventDefault();
  const annotatorId = annotatorInput.value.trim();
  if (!annotatorId) {
    return;
  }
  const api = new ApiClient((url, init) => fetch(url, init));
  session = new ReviewSession({
    api,
    annotatorId,
    fluency: nativeCheckbox.checked ? "native" : "non_native",
  });
  session.subscribe(render);
  void session.start();
});

document.addEventListener("keydown", (event) => {
  if (!session) {
    return;
  }
  const action = actionForKey(contextOf(event));
  if (!action) {
    return;
  }
  event.preventDefault();
  switch (action) {
    case "correct":
      void session.decide("correct");
      break;
    case "incorrect":
      session.beginCorrection();
      break;
    case "unsure":
      void session.decide("unsure");
      break;
    case "replay":
      video.currentTime = 0;
      void video.play();
      break;
    case "toggle-speed":
      session.toggleSpeed();
      break;
  }
});

correctionInput.addEventListener("input", renderSuggestions);
correctionInput.addEventListener("keydown", (event) => {
  if (event.key === "Enter") {
    event.preventDefault();
    void session?.submitCorrection(correctionInput.value);
  } else if (event.key === "Escape") {
    event.preventDefault();
    session?.cancelCorrection();
  }
});

el<HTMLButtonElement>("btn-correct").addEventListener("click", () => {
  void session?.decide("correct");
});
el<HTMLButtonElement>("btn-incorrect").addEventListener("click", () => {
  session?.beginCorrection();
});
el<HTMLButtonElement>("btn-unsure").addEventListener("click", () => {
  void session?.decide("unsure");
});
el<HTMLButtonElement>("btn-retry").addEventListener("click", () => {
  void session?.retry();
});

video.addEventListener("error", () => {
  session?.markMediaMissing();
});
video.loop = true;
