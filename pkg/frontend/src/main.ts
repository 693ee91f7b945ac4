import { TutorApi } from "./api.js";
import { TutorApp } from "./app.js";

// When served from the API process at /ui, same-origin calls just work;
// override with ?api=<base> for a split dev setup.
const override = new URLSearchParams(window.location.search).get("api");
const base = override ?? window.location.origin;

const app = new TutorApp(document, new TutorApi(base));
void app.start();
