#ifndef DIRNET_SRC_OVERLOADED_HPP
#define DIRNET_SRC_OVERLOADED_HPP

namespace dirnet::detail {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace dirnet::detail

#endif  // DIRNET_SRC_OVERLOADED_HPP
