import { ApiClient } from "./api.js";
import { Explorer } from "./explorer.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8077";
const container = document.getElementById("app");
if (!container) throw new Error("missing #app container");

const explorer = new Explorer(container, new ApiClient(base));
(window as unknown as { explorer: Explorer }).explorer = explorer;
explorer.start().catch((error) => {
  explorer.toast(`cannot reach ${base}: ${error.message}`);
});
