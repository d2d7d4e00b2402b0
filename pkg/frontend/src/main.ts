import { AnnotationApp, HttpApi } from "./app.js";

const root = document.getElementById("app");
if (root) {
  new AnnotationApp(root, new HttpApi()).mount();
}
