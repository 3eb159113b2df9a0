// Tiny DOM helpers; enough structure that views stay readable without a
// framework.

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function banner(kind: "error" | "info", text: string): HTMLElement {
  const box = el("div", { class: `banner banner-${kind}`, role: "alert" }, [text]);
  const dismiss = el("button", { class: "banner-dismiss", type: "button" }, ["dismiss"]);
  dismiss.addEventListener("click", () => box.remove());
  box.append(dismiss);
  return box;
}

export function chipList(items: string[], kind: string): HTMLElement {
  const wrap = el("span", { class: `chips chips-${kind}` });
  if (items.length === 0) {
    wrap.append(el("span", { class: "chip chip-empty" }, ["none"]));
  }
  for (const item of items) {
    wrap.append(el("span", { class: `chip chip-${kind}` }, [item]));
  }
  return wrap;
}
