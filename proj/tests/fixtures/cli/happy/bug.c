int add(int a, int b) { return a + b; }
int main(void) {
  int r = add(1, 2);
  crash(r);
  return 0;
}
