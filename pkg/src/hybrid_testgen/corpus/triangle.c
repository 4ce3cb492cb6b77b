int classify(int a, int b, int c) {
 if (a <= 0 || b <= 0 || c <= 0) {
  return 0;
 }
 if (a + b <= c || a + c <= b || b + c <= a) {
  return 0;
 }
 if (a == b && b == c) {
  return 3;
 }
 if (a == b || b == c || a == c) {
  return 2;
 }
 return 1;
}

int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 int c = __VERIFIER_nondet_int();
 if (a > 1000 || b > 1000 || c > 1000) {
  return 0;
 }
 int kind = classify(a, b, c);
 if (kind == 3 && a == 777) {
  reach_error();
 }
 return kind;
}
