import { VirtualTaClient } from "./api";
import { ChatWidget } from "./chat";
import { ReviewDashboard } from "./review";
import "./styles.css";

function query<T extends HTMLElement>(selector: string): T {
  const node = document.querySelector<T>(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node;
}

function activate(tab: "chat" | "review"): void {
  query<HTMLElement>("#chat-panel").hidden = tab !== "chat";
  query<HTMLElement>("#review-panel").hidden = tab !== "review";
  query<HTMLButtonElement>("#tab-chat").classList.toggle("active", tab === "chat");
  query<HTMLButtonElement>("#tab-review").classList.toggle("active", tab === "review");
}

function main(): void {
  const courseInput = query<HTMLInputElement>("#course-id");
  const tokenInput = query<HTMLInputElement>("#staff-token");

  let chat: ChatWidget | undefined;
  let dashboard: ReviewDashboard | undefined;

  const connect = () => {
    const courseId = courseInput.value.trim();
    if (!courseId) return;

    const chatRoot = query<HTMLElement>("#chat-panel");
    chatRoot.replaceChildren();
    chat = new ChatWidget(chatRoot, new VirtualTaClient(), courseId);
    void chat.loadLanguages();

    const reviewRoot = query<HTMLElement>("#review-panel");
    reviewRoot.replaceChildren();
    dashboard = new ReviewDashboard(
      reviewRoot,
      new VirtualTaClient({ token: tokenInput.value.trim() }),
      courseId,
    );
    void dashboard.load().catch(() => {
      // a missing draft is normal for a fresh course; the grid stays empty
    });
  };

  query<HTMLButtonElement>("#connect").addEventListener("click", connect);
  query<HTMLButtonElement>("#tab-chat").addEventListener("click", () => activate("chat"));
  query<HTMLButtonElement>("#tab-review").addEventListener("click", () => activate("review"));
  activate("chat");
}

main();
