#pragma once

// Han codepoints that exist only in one orthography. Derived from the OpenCC
// character conversion tables (STCharacters / TSCharacters, Apache-2.0): a
// codepoint is listed when it converts to a different character and is not a
// conversion source in the opposite direction. Arrays are sorted ascending.

#include <array>

namespace cowrite::text::han {

inline constexpr std::array<char32_t, 3804> simplified_only = {
    0x3437, 0x343D, 0x3447, 0x3448, 0x3454, 0x3469, 0x34C6, 0x34E5, 0x34F0, 0x3509,
    0x358A, 0x359E, 0x360E, 0x36AF, 0x36C0, 0x36DF, 0x36E0, 0x36E3, 0x36E4, 0x36FF,
    0x37C6, 0x37DC, 0x37E5, 0x384E, 0x3918, 0x393D, 0x396A, 0x39CF, 0x39D0, 0x39D1,
    0x39DF, 0x39F0, 0x3A2B, 0x3B4E, 0x3B4F, 0x3B63, 0x3B64, 0x3B74, 0x3C69, 0x3C6E,
    0x3CBF, 0x3CD4, 0x3CD5, 0x3CE0, 0x3CE1, 0x3CE2, 0x3CFD, 0x3D0B, 0x3D89, 0x3DB6,
    0x3DBD, 0x3E8D, 0x3EC5, 0x3ECF, 0x3ED8, 0x4025, 0x4056, 0x40B5, 0x40C5, 0x4149,
    0x415F, 0x416A, 0x41F2, 0x4264, 0x4336, 0x4337, 0x4338, 0x4339, 0x433A, 0x433B,
    0x433C, 0x433D, 0x433E, 0x433F, 0x4340, 0x4341, 0x4360, 0x43AC, 0x43DD, 0x447D,
    0x44D3, 0x44D5, 0x44D6, 0x44E8, 0x45D6, 0x461B, 0x461E, 0x464A, 0x464C, 0x4653,
    0x4723, 0x4724, 0x4725, 0x4727, 0x4729, 0x4759, 0x478C, 0x478D, 0x478E, 0x4790,
    0x47E2, 0x4880, 0x4881, 0x4882, 0x497A, 0x497D, 0x497E, 0x497F, 0x4980, 0x4981,
    0x4982, 0x4983, 0x4985, 0x4986, 0x49B6, 0x49B7, 0x4A44, 0x4B6A, 0x4BC3, 0x4BC4,
    0x4BC5, 0x4C9D, 0x4C9E, 0x4C9F, 0x4CA0, 0x4CA1, 0x4CA2, 0x4CA3, 0x4D13, 0x4D14,
    0x4D15, 0x4D16, 0x4D17, 0x4D18, 0x4D19, 0x4DAE, 0x4E0E, 0x4E13, 0x4E1A, 0x4E1B,
    0x4E1C, 0x4E1D, 0x4E22, 0x4E24, 0x4E25, 0x4E27, 0x4E2A, 0x4E34, 0x4E3A, 0x4E3D,
    0x4E3E, 0x4E48, 0x4E49, 0x4E4C, 0x4E50, 0x4E54, 0x4E60, 0x4E61, 0x4E66, 0x4E70,
    0x4E71, 0x4E89, 0x4E8F, 0x4E9A, 0x4EA7, 0x4EA9, 0x4EB2, 0x4EB5, 0x4EB8, 0x4EBF,
    0x4EC5, 0x4ECE, 0x4ED1, 0x4ED3, 0x4EEA, 0x4EEC, 0x4F17, 0x4F18, 0x4F1A, 0x4F1B,
    0x4F1E, 0x4F1F, 0x4F20, 0x4F21, 0x4F23, 0x4F24, 0x4F25, 0x4F26, 0x4F27, 0x4F2A,
    0x4F2B, 0x4F53, 0x4F65, 0x4FA0, 0x4FA3, 0x4FA5, 0x4FA6, 0x4FA7, 0x4FA8, 0x4FA9,
    0x4FAA, 0x4FAC, 0x4FAD, 0x4FE3, 0x4FE6, 0x4FE8, 0x4FE9, 0x4FEA, 0x4FEB, 0x4FED,
    0x503A, 0x503E, 0x506C, 0x507B, 0x507E, 0x507F, 0x50A4, 0x50A5, 0x50A7, 0x50A8,
    0x50A9, 0x513F, 0x5151, 0x5156, 0x5170, 0x5173, 0x5174, 0x5179, 0x517B, 0x517D,
    0x5181, 0x5185, 0x5188, 0x518C, 0x5199, 0x519B, 0x519C, 0x51AF, 0x51B2, 0x51B3,
    0x51B5, 0x51BB, 0x51C0, 0x51C4, 0x51C9, 0x51CF, 0x51D1, 0x51DB, 0x51E4, 0x51EB,
    0x51ED, 0x51EF, 0x51FB, 0x51FF, 0x520D, 0x5218, 0x5219, 0x521A, 0x521B, 0x5220,
    0x522B, 0x522C, 0x522D, 0x5239, 0x523D, 0x523E, 0x523F, 0x5240, 0x5242, 0x5250,
    0x5251, 0x5265, 0x5267, 0x529D, 0x529E, 0x52A1, 0x52A2, 0x52A8, 0x52B1, 0x52B2,
    0x52B3, 0x52BF, 0x52CB, 0x52DA, 0x5300, 0x5326, 0x532E, 0x533A, 0x533B, 0x534E,
    0x534F, 0x5355, 0x5356, 0x5362, 0x5364, 0x5367, 0x536B, 0x5374, 0x537A, 0x5385,
    0x5386, 0x5389, 0x538B, 0x538C, 0x538D, 0x5390, 0x5395, 0x53A2, 0x53A3, 0x53A6,
    0x53A8, 0x53A9, 0x53AE, 0x53BF, 0x53C1, 0x53C2, 0x53C6, 0x53C7, 0x53CC, 0x53D1,
    0x53D8, 0x53D9, 0x53E0, 0x53F7, 0x53F9, 0x53FD, 0x5413, 0x5415, 0x5417, 0x5428,
    0x542C, 0x542F, 0x5434, 0x5450, 0x5452, 0x5453, 0x5455, 0x5456, 0x5457, 0x5458,
    0x5459, 0x545B, 0x545C, 0x548F, 0x5499, 0x549B, 0x549D, 0x54A4, 0x54CD, 0x54D1,
    0x54D2, 0x54D3, 0x54D4, 0x54D5, 0x54D7, 0x54D9, 0x54DC, 0x54DD, 0x54DF, 0x551B,
    0x551D, 0x5520, 0x5521, 0x5522, 0x5524, 0x5567, 0x556C, 0x556D, 0x556E, 0x556F,
    0x5570, 0x5574, 0x5578, 0x55B7, 0x55BD, 0x55BE, 0x55EB, 0x55F3, 0x5618, 0x5624,
    0x5631, 0x565C, 0x56A3, 0x56E2, 0x56ED, 0x56F1, 0x56F4, 0x56F5, 0x56FD, 0x56FE,
    0x5706, 0x5723, 0x5739, 0x573A, 0x574F, 0x5757, 0x575A, 0x575B, 0x575C, 0x575D,
    0x575E, 0x575F, 0x5760, 0x5784, 0x5785, 0x5786, 0x5792, 0x57A6, 0x57A9, 0x57AB,
    0x57AD, 0x57AF, 0x57B1, 0x57B2, 0x57B4, 0x57D8, 0x57D9, 0x57DA, 0x5811, 0x5815,
    0x5846, 0x5899, 0x58EE, 0x58F0, 0x58F3, 0x58F6, 0x58F8, 0x5904, 0x5907, 0x590D,
    0x591F, 0x5934, 0x5939, 0x593A, 0x5941, 0x5942, 0x594B, 0x5956, 0x5965, 0x5986,
    0x5987, 0x5988, 0x59A9, 0x59AA, 0x59AB, 0x59D7, 0x59F9, 0x5A04, 0x5A05, 0x5A06,
    0x5A07, 0x5A08, 0x5A31, 0x5A32, 0x5A34, 0x5A73, 0x5A74, 0x5A75, 0x5A76, 0x5AAA,
    0x5AAD, 0x5AD2, 0x5AD4, 0x5AF1, 0x5B37, 0x5B59, 0x5B66, 0x5B6A, 0x5B81, 0x5B9D,
    0x5B9E, 0x5BA0, 0x5BA1, 0x5BAA, 0x5BAB, 0x5BBD, 0x5BBE, 0x5BDD, 0x5BF9, 0x5BFB,
    0x5BFC, 0x5BFF, 0x5C06, 0x5C14, 0x5C18, 0x5C1D, 0x5C27, 0x5C34, 0x5C3D, 0x5C42,
    0x5C43, 0x5C49, 0x5C4A, 0x5C5E, 0x5C61, 0x5C66, 0x5C7F, 0x5C81, 0x5C82, 0x5C96,
    0x5C97, 0x5C98, 0x5C9A, 0x5C9B, 0x5CAD, 0x5CBD, 0x5CBF, 0x5CC3, 0x5CC4, 0x5CE1,
    0x5CE3, 0x5CE4, 0x5CE5, 0x5CE6, 0x5CF0, 0x5D02, 0x5D03, 0x5D04, 0x5D2D, 0x5D58,
    0x5D5A, 0x5D5D, 0x5DC5, 0x5DE9, 0x5DEF, 0x5E01, 0x5E05, 0x5E08, 0x5E0F, 0x5E10,
    0x5E1C, 0x5E26, 0x5E27, 0x5E2E, 0x5E31, 0x5E3B, 0x5E3C, 0x5E42, 0x5E76, 0x5E84,
    0x5E86, 0x5E8A, 0x5E90, 0x5E91, 0x5E93, 0x5E94, 0x5E99, 0x5E9E, 0x5E9F, 0x5EBC,
    0x5EEA, 0x5F00, 0x5F02, 0x5F03, 0x5F11, 0x5F20, 0x5F25, 0x5F2A, 0x5F2F, 0x5F39,
    0x5F3A, 0x5F52, 0x5F53, 0x5F55, 0x5F5F, 0x5F66, 0x5F68, 0x5F7B, 0x5F84, 0x5F95,
    0x5FC6, 0x5FCF, 0x5FE7, 0x5FFE, 0x6000, 0x6001, 0x6002, 0x6003, 0x6004, 0x6005,
    0x6006, 0x601C, 0x603B, 0x603C, 0x603F, 0x604B, 0x6052, 0x6073, 0x6076, 0x6078,
    0x6079, 0x607A, 0x607B, 0x607C, 0x607D, 0x60A6, 0x60AB, 0x60AC, 0x60AD, 0x60AE,
    0x60AF, 0x60CA, 0x60E7, 0x60E8, 0x60E9, 0x60EB, 0x60EC, 0x60ED, 0x60EE, 0x60EF,
    0x6120, 0x6124, 0x6126, 0x6151, 0x616D, 0x61D1, 0x61D2, 0x61D4, 0x6206, 0x620B,
    0x620F, 0x6217, 0x6218, 0x622C, 0x622F, 0x6237, 0x6251, 0x6267, 0x6269, 0x626A,
    0x626B, 0x626C, 0x6270, 0x629A, 0x629B, 0x629F, 0x62A0, 0x62A1, 0x62A2, 0x62A4,
    0x62A5, 0x62C5, 0x62DF, 0x62E2, 0x62E3, 0x62E5, 0x62E6, 0x62E7, 0x62E8, 0x62E9,
    0x631A, 0x631B, 0x631C, 0x631D, 0x631E, 0x631F, 0x6320, 0x6321, 0x6322, 0x6323,
    0x6324, 0x6325, 0x6326, 0x635D, 0x635E, 0x635F, 0x6361, 0x6362, 0x6363, 0x63B3,
    0x63B4, 0x63B7, 0x63B8, 0x63BA, 0x63BC, 0x63FD, 0x63FE, 0x63FF, 0x6400, 0x6401,
    0x6402, 0x6404, 0x6405, 0x643A, 0x6444, 0x6445, 0x6446, 0x6447, 0x6448, 0x644A,
    0x6484, 0x6491, 0x64B5, 0x64B7, 0x64B8, 0x64BA, 0x64DC, 0x64DE, 0x6512, 0x654C,
    0x655A, 0x655B, 0x6569, 0x6570, 0x658B, 0x6593, 0x65A9, 0x65AD, 0x65E0, 0x65E7,
    0x65F6, 0x65F7, 0x65F8, 0x6619, 0x6635, 0x663C, 0x663D, 0x663E, 0x664B, 0x6652,
    0x6653, 0x6654, 0x6655, 0x6656, 0x6682, 0x6685, 0x66A7, 0x672F, 0x673A, 0x6740,
    0x6742, 0x6743, 0x6761, 0x6765, 0x6768, 0x6769, 0x6784, 0x679E, 0x67A2, 0x67A3,
    0x67A5, 0x67A7, 0x67A8, 0x67AA, 0x67AB, 0x67AD, 0x67E0, 0x67FD, 0x6800, 0x6805,
    0x6807, 0x6808, 0x6809, 0x680A, 0x680B, 0x680C, 0x680E, 0x680F, 0x6811, 0x6816,
    0x6837, 0x683E, 0x6860, 0x6861, 0x6862, 0x6863, 0x6864, 0x6865, 0x6866, 0x6867,
    0x6868, 0x6869, 0x686A, 0x68A6, 0x68BC, 0x68BE, 0x68BF, 0x68C0, 0x68C1, 0x68C2,
    0x6901, 0x691D, 0x691F, 0x6920, 0x6922, 0x6924, 0x692B, 0x692D, 0x692E, 0x697C,
    0x6984, 0x6985, 0x6987, 0x6988, 0x6989, 0x699D, 0x69DA, 0x69DB, 0x69DF, 0x69E0,
    0x6A2A, 0x6A2F, 0x6A31, 0x6A65, 0x6A71, 0x6A79, 0x6A7C, 0x6AA9, 0x6B22, 0x6B24,
    0x6B27, 0x6B7C, 0x6B81, 0x6B87, 0x6B8B, 0x6B92, 0x6B93, 0x6B9A, 0x6BA1, 0x6BB4,
    0x6BC1, 0x6BC2, 0x6BD5, 0x6BD9, 0x6BE1, 0x6BF5, 0x6BF6, 0x6C07, 0x6C14, 0x6C22,
    0x6C29, 0x6C32, 0x6C47, 0x6C49, 0x6C64, 0x6C79, 0x6C84, 0x6C9F, 0x6CA1, 0x6CA3,
    0x6CA4, 0x6CA5, 0x6CA6, 0x6CA7, 0x6CA8, 0x6CA9, 0x6CAA, 0x6CDE, 0x6CEA, 0x6CF6,
    0x6CF7, 0x6CF8, 0x6CFA, 0x6CFB, 0x6CFC, 0x6CFD, 0x6CFE, 0x6D01, 0x6D12, 0x6D3C,
    0x6D43, 0x6D45, 0x6D46, 0x6D47, 0x6D48, 0x6D49, 0x6D4A, 0x6D4B, 0x6D4D, 0x6D4E,
    0x6D4F, 0x6D50, 0x6D51, 0x6D52, 0x6D53, 0x6D54, 0x6D55, 0x6D9A, 0x6D9B, 0x6D9D,
    0x6D9E, 0x6D9F, 0x6DA0, 0x6DA1, 0x6DA2, 0x6DA3, 0x6DA4, 0x6DA6, 0x6DA7, 0x6DA8,
    0x6DA9, 0x6E0A, 0x6E0C, 0x6E0D, 0x6E0E, 0x6E10, 0x6E11, 0x6E14, 0x6E16, 0x6E17,
    0x6E29, 0x6E7E, 0x6E7F, 0x6E81, 0x6E83, 0x6E85, 0x6E86, 0x6E87, 0x6ED7, 0x6EDA,
    0x6EDE, 0x6EDF, 0x6EE0, 0x6EE1, 0x6EE2, 0x6EE4, 0x6EE5, 0x6EE6, 0x6EE8, 0x6EE9,
    0x6EEA, 0x6F46, 0x6F47, 0x6F4B, 0x6F4D, 0x6F5C, 0x6F74, 0x6F9B, 0x6F9C, 0x6FD1,
    0x6FD2, 0x704F, 0x706D, 0x706F, 0x7075, 0x7076, 0x707E, 0x707F, 0x7080, 0x7089,
    0x7096, 0x709C, 0x709D, 0x70B9, 0x70BC, 0x70BD, 0x70C1, 0x70C2, 0x70C3, 0x70DB,
    0x70DF, 0x70E6, 0x70E7, 0x70E8, 0x70E9, 0x70EB, 0x70EC, 0x70ED, 0x7115, 0x7116,
    0x7118, 0x7174, 0x7231, 0x7237, 0x724D, 0x7266, 0x7275, 0x727A, 0x728A, 0x72B6,
    0x72B7, 0x72B8, 0x72B9, 0x72C8, 0x72DD, 0x72DE, 0x72EC, 0x72ED, 0x72EE, 0x72EF,
    0x72F0, 0x72F1, 0x72F2, 0x7303, 0x730E, 0x7315, 0x7321, 0x732A, 0x732B, 0x732C,
    0x732E, 0x736D, 0x7391, 0x7399, 0x739A, 0x739B, 0x73AE, 0x73AF, 0x73B0, 0x73B1,
    0x73BA, 0x73D0, 0x73D1, 0x73F0, 0x73F2, 0x740E, 0x740F, 0x7410, 0x743C, 0x7476,
    0x7477, 0x7478, 0x748E, 0x74D2, 0x74EE, 0x74EF, 0x7535, 0x753B, 0x7545, 0x7574,
    0x7596, 0x7597, 0x759F, 0x75A0, 0x75A1, 0x75AC, 0x75AD, 0x75AE, 0x75AF, 0x75B1,
    0x75B4, 0x75C8, 0x75C9, 0x75D2, 0x75D6, 0x75E8, 0x75EA, 0x75EB, 0x75F4, 0x7605,
    0x7606, 0x7617, 0x7618, 0x762A, 0x762B, 0x763E, 0x763F, 0x765E, 0x7663, 0x766B,
    0x7691, 0x76B1, 0x76B2, 0x76CF, 0x76D0, 0x76D1, 0x76D6, 0x76D7, 0x76D8, 0x770D,
    0x7726, 0x772C, 0x7741, 0x7750, 0x7751, 0x7786, 0x7792, 0x77A9, 0x77EB, 0x77F6,
    0x77FE, 0x77FF, 0x7800, 0x7801, 0x7816, 0x7817, 0x781A, 0x781C, 0x783A, 0x783B,
    0x783E, 0x7840, 0x7841, 0x7855, 0x7856, 0x7857, 0x7859, 0x785A, 0x7875, 0x7877,
    0x788D, 0x789B, 0x789C, 0x78B1, 0x793C, 0x7943, 0x794E, 0x7962, 0x796F, 0x7977,
    0x7978, 0x7980, 0x7984, 0x7985, 0x79BB, 0x79C3, 0x79C6, 0x79D8, 0x79EF, 0x79F0,
    0x79FD, 0x79FE, 0x7A06, 0x7A0E, 0x7A23, 0x7A33, 0x7A51, 0x7A5E, 0x7A77, 0x7A83,
    0x7A8D, 0x7A8E, 0x7A91, 0x7A9C, 0x7A9D, 0x7AA5, 0x7AA6, 0x7AAD, 0x7AD6, 0x7ADE,
    0x7B03, 0x7B0B, 0x7B14, 0x7B15, 0x7B3A, 0x7B3C, 0x7B3E, 0x7B5A, 0x7B5B, 0x7B5C,
    0x7B5D, 0x7B79, 0x7B7C, 0x7B7E, 0x7B7F, 0x7B80, 0x7B93, 0x7BA6, 0x7BA7, 0x7BA8,
    0x7BA9, 0x7BAA, 0x7BAB, 0x7BD1, 0x7BD3, 0x7BEE, 0x7BEF, 0x7BF1, 0x7C16, 0x7C41,
    0x7C74, 0x7C7B, 0x7C7C, 0x7C9C, 0x7C9D, 0x7CA4, 0x7CAA, 0x7CAE, 0x7CBD, 0x7CC1,
    0x7CC7, 0x7CCD, 0x7D27, 0x7D77, 0x7E06, 0x7E9F, 0x7EA0, 0x7EA1, 0x7EA2, 0x7EA3,
    0x7EA4, 0x7EA5, 0x7EA6, 0x7EA7, 0x7EA8, 0x7EA9, 0x7EAA, 0x7EAB, 0x7EAC, 0x7EAD,
    0x7EAE, 0x7EAF, 0x7EB0, 0x7EB1, 0x7EB2, 0x7EB3, 0x7EB4, 0x7EB5, 0x7EB6, 0x7EB7,
    0x7EB8, 0x7EB9, 0x7EBA, 0x7EBB, 0x7EBC, 0x7EBD, 0x7EBE, 0x7EBF, 0x7EC0, 0x7EC1,
    0x7EC2, 0x7EC3, 0x7EC4, 0x7EC5, 0x7EC6, 0x7EC7, 0x7EC8, 0x7EC9, 0x7ECA, 0x7ECB,
    0x7ECC, 0x7ECD, 0x7ECE, 0x7ECF, 0x7ED0, 0x7ED1, 0x7ED2, 0x7ED3, 0x7ED4, 0x7ED5,
    0x7ED6, 0x7ED7, 0x7ED8, 0x7ED9, 0x7EDA, 0x7EDB, 0x7EDC, 0x7EDD, 0x7EDE, 0x7EDF,
    0x7EE0, 0x7EE1, 0x7EE2, 0x7EE3, 0x7EE4, 0x7EE5, 0x7EE6, 0x7EE7, 0x7EE8, 0x7EE9,
    0x7EEA, 0x7EEB, 0x7EEC, 0x7EED, 0x7EEE, 0x7EEF, 0x7EF0, 0x7EF1, 0x7EF2, 0x7EF3,
    0x7EF4, 0x7EF5, 0x7EF6, 0x7EF7, 0x7EF8, 0x7EF9, 0x7EFA, 0x7EFB, 0x7EFC, 0x7EFD,
    0x7EFE, 0x7EFF, 0x7F00, 0x7F01, 0x7F02, 0x7F03, 0x7F04, 0x7F05, 0x7F06, 0x7F07,
    0x7F08, 0x7F09, 0x7F0A, 0x7F0B, 0x7F0C, 0x7F0D, 0x7F0E, 0x7F0F, 0x7F10, 0x7F11,
    0x7F12, 0x7F13, 0x7F14, 0x7F15, 0x7F16, 0x7F17, 0x7F18, 0x7F19, 0x7F1A, 0x7F1B,
    0x7F1C, 0x7F1D, 0x7F1E, 0x7F1F, 0x7F20, 0x7F21, 0x7F22, 0x7F23, 0x7F24, 0x7F25,
    0x7F26, 0x7F27, 0x7F28, 0x7F29, 0x7F2A, 0x7F2B, 0x7F2C, 0x7F2D, 0x7F2E, 0x7F2F,
    0x7F30, 0x7F31, 0x7F32, 0x7F33, 0x7F34, 0x7F35, 0x7F42, 0x7F51, 0x7F57, 0x7F5A,
    0x7F62, 0x7F74, 0x7F81, 0x7F9F, 0x7FA1, 0x7FA4, 0x7FD8, 0x7FD9, 0x7FDA, 0x8022,
    0x8027, 0x8038, 0x803B, 0x8042, 0x804B, 0x804C, 0x804D, 0x8054, 0x8069, 0x806A,
    0x8083, 0x80A0, 0x80A4, 0x80AE, 0x80B4, 0x80BE, 0x80BF, 0x80C0, 0x80C1, 0x80C6,
    0x80E7, 0x80E8, 0x80EA, 0x80EB, 0x80F6, 0x8109, 0x810D, 0x810F, 0x8110, 0x8111,
    0x8113, 0x8114, 0x811A, 0x8131, 0x8136, 0x8138, 0x8158, 0x816D, 0x817B, 0x817C,
    0x817D, 0x817E, 0x8191, 0x81DC, 0x8206, 0x8223, 0x8230, 0x8231, 0x823B, 0x8270,
    0x8273, 0x827A, 0x8282, 0x8288, 0x8297, 0x829C, 0x82A6, 0x82C1, 0x82C7, 0x82C8,
    0x82CB, 0x82CC, 0x82CD, 0x82CE, 0x82CF, 0x830E, 0x830F, 0x8311, 0x8314, 0x8315,
    0x8327, 0x8346, 0x8359, 0x835A, 0x835B, 0x835C, 0x835D, 0x835E, 0x835F, 0x8360,
    0x8361, 0x8363, 0x8364, 0x8365, 0x8366, 0x8367, 0x8368, 0x8369, 0x836A, 0x836B,
    0x836C, 0x836D, 0x836E, 0x836F, 0x8385, 0x83B1, 0x83B2, 0x83B3, 0x83B4, 0x83B6,
    0x83B7, 0x83B8, 0x83B9, 0x83BA, 0x83BC, 0x841A, 0x841D, 0x8424, 0x8425, 0x8426,
    0x8427, 0x8428, 0x8471, 0x8480, 0x8487, 0x8489, 0x848B, 0x848C, 0x848F, 0x84DD,
    0x84DF, 0x84E0, 0x84E3, 0x84E5, 0x84E6, 0x8502, 0x8537, 0x8539, 0x853A, 0x853C,
    0x8570, 0x8572, 0x8574, 0x85AE, 0x85D3, 0x8616, 0x864F, 0x8651, 0x865A, 0x866C,
    0x866E, 0x8671, 0x867D, 0x867E, 0x867F, 0x8680, 0x8681, 0x8682, 0x8683, 0x8695,
    0x86AC, 0x86CA, 0x86CE, 0x86CF, 0x86EE, 0x86F0, 0x86F1, 0x86F2, 0x86F3, 0x86F4,
    0x8715, 0x8717, 0x8747, 0x8748, 0x8749, 0x877C, 0x877E, 0x8780, 0x87A8, 0x87CF,
    0x8845, 0x8854, 0x8865, 0x886C, 0x886E, 0x8884, 0x8885, 0x8886, 0x889C, 0x88AD,
    0x88AF, 0x88C5, 0x88C6, 0x88C8, 0x88E2, 0x88E3, 0x88E4, 0x88E5, 0x891B, 0x8934,
    0x8955, 0x89C1, 0x89C2, 0x89C3, 0x89C4, 0x89C5, 0x89C6, 0x89C7, 0x89C8, 0x89C9,
    0x89CA, 0x89CB, 0x89CC, 0x89CD, 0x89CE, 0x89CF, 0x89D0, 0x89D1, 0x89DE, 0x89E6,
    0x89EF, 0x8A1A, 0x8A5F, 0x8A89, 0x8A8A, 0x8BA0, 0x8BA1, 0x8BA2, 0x8BA3, 0x8BA4,
    0x8BA5, 0x8BA6, 0x8BA7, 0x8BA8, 0x8BA9, 0x8BAA, 0x8BAB, 0x8BAC, 0x8BAD, 0x8BAE,
    0x8BAF, 0x8BB0, 0x8BB1, 0x8BB2, 0x8BB3, 0x8BB4, 0x8BB5, 0x8BB6, 0x8BB7, 0x8BB8,
    0x8BB9, 0x8BBA, 0x8BBB, 0x8BBC, 0x8BBD, 0x8BBE, 0x8BBF, 0x8BC0, 0x8BC1, 0x8BC2,
    0x8BC3, 0x8BC4, 0x8BC5, 0x8BC6, 0x8BC7, 0x8BC8, 0x8BC9, 0x8BCA, 0x8BCB, 0x8BCC,
    0x8BCD, 0x8BCE, 0x8BCF, 0x8BD0, 0x8BD1, 0x8BD2, 0x8BD3, 0x8BD4, 0x8BD5, 0x8BD6,
    0x8BD7, 0x8BD8, 0x8BD9, 0x8BDA, 0x8BDB, 0x8BDC, 0x8BDD, 0x8BDE, 0x8BDF, 0x8BE0,
    0x8BE1, 0x8BE2, 0x8BE3, 0x8BE4, 0x8BE5, 0x8BE6, 0x8BE7, 0x8BE8, 0x8BE9, 0x8BEA,
    0x8BEB, 0x8BEC, 0x8BED, 0x8BEE, 0x8BEF, 0x8BF0, 0x8BF1, 0x8BF2, 0x8BF3, 0x8BF4,
    0x8BF5, 0x8BF6, 0x8BF7, 0x8BF8, 0x8BF9, 0x8BFA, 0x8BFB, 0x8BFC, 0x8BFD, 0x8BFE,
    0x8BFF, 0x8C00, 0x8C01, 0x8C02, 0x8C03, 0x8C04, 0x8C05, 0x8C06, 0x8C07, 0x8C08,
    0x8C09, 0x8C0A, 0x8C0B, 0x8C0C, 0x8C0D, 0x8C0E, 0x8C0F, 0x8C10, 0x8C11, 0x8C12,
    0x8C13, 0x8C14, 0x8C15, 0x8C16, 0x8C17, 0x8C18, 0x8C19, 0x8C1A, 0x8C1B, 0x8C1C,
    0x8C1D, 0x8C1E, 0x8C1F, 0x8C20, 0x8C21, 0x8C22, 0x8C23, 0x8C24, 0x8C25, 0x8C26,
    0x8C27, 0x8C28, 0x8C29, 0x8C2A, 0x8C2B, 0x8C2C, 0x8C2D, 0x8C2E, 0x8C2F, 0x8C30,
    0x8C31, 0x8C32, 0x8C33, 0x8C34, 0x8C35, 0x8C36, 0x8C6E, 0x8D1D, 0x8D1E, 0x8D1F,
    0x8D20, 0x8D21, 0x8D22, 0x8D23, 0x8D24, 0x8D25, 0x8D26, 0x8D27, 0x8D28, 0x8D29,
    0x8D2A, 0x8D2B, 0x8D2C, 0x8D2D, 0x8D2E, 0x8D2F, 0x8D30, 0x8D31, 0x8D32, 0x8D33,
    0x8D34, 0x8D35, 0x8D36, 0x8D37, 0x8D38, 0x8D39, 0x8D3A, 0x8D3B, 0x8D3C, 0x8D3D,
    0x8D3E, 0x8D3F, 0x8D40, 0x8D41, 0x8D42, 0x8D43, 0x8D44, 0x8D45, 0x8D46, 0x8D47,
    0x8D48, 0x8D49, 0x8D4A, 0x8D4B, 0x8D4C, 0x8D4D, 0x8D4E, 0x8D4F, 0x8D50, 0x8D51,
    0x8D52, 0x8D53, 0x8D54, 0x8D55, 0x8D56, 0x8D57, 0x8D58, 0x8D59, 0x8D5A, 0x8D5B,
    0x8D5C, 0x8D5D, 0x8D5E, 0x8D5F, 0x8D60, 0x8D61, 0x8D62, 0x8D63, 0x8D6A, 0x8D75,
    0x8D76, 0x8D8B, 0x8DB1, 0x8DB8, 0x8DC3, 0x8DC4, 0x8DDE, 0x8DF5, 0x8DF6, 0x8DF7,
    0x8DF8, 0x8DF9, 0x8DFB, 0x8E0C, 0x8E2A, 0x8E2C, 0x8E2F, 0x8E51, 0x8E52, 0x8E70,
    0x8E7F, 0x8E8F, 0x8E9C, 0x8EAF, 0x8F66, 0x8F67, 0x8F68, 0x8F69, 0x8F6A, 0x8F6B,
    0x8F6C, 0x8F6D, 0x8F6E, 0x8F6F, 0x8F70, 0x8F71, 0x8F72, 0x8F73, 0x8F74, 0x8F75,
    0x8F76, 0x8F77, 0x8F78, 0x8F79, 0x8F7A, 0x8F7B, 0x8F7C, 0x8F7D, 0x8F7E, 0x8F7F,
    0x8F80, 0x8F81, 0x8F82, 0x8F83, 0x8F84, 0x8F85, 0x8F86, 0x8F87, 0x8F88, 0x8F89,
    0x8F8A, 0x8F8B, 0x8F8C, 0x8F8D, 0x8F8E, 0x8F8F, 0x8F90, 0x8F91, 0x8F92, 0x8F93,
    0x8F94, 0x8F95, 0x8F96, 0x8F97, 0x8F98, 0x8F99, 0x8F9A, 0x8F9E, 0x8FA9, 0x8FAB,
    0x8FB9, 0x8FBD, 0x8FBE, 0x8FC1, 0x8FC7, 0x8FC8, 0x8FD0, 0x8FD8, 0x8FD9, 0x8FDB,
    0x8FDC, 0x8FDD, 0x8FDE, 0x8FDF, 0x8FE9, 0x8FF3, 0x8FF9, 0x9009, 0x900A, 0x9012,
    0x9026, 0x903B, 0x9057, 0x9065, 0x9093, 0x909D, 0x90AC, 0x90AE, 0x90B9, 0x90BA,
    0x90BB, 0x90CF, 0x90D0, 0x90D1, 0x90D3, 0x90E6, 0x90E7, 0x90F8, 0x9142, 0x915D,
    0x9166, 0x9171, 0x917D, 0x917E, 0x917F, 0x91CA, 0x9274, 0x92AE, 0x933E, 0x9485,
    0x9486, 0x9487, 0x9488, 0x9489, 0x948A, 0x948B, 0x948C, 0x948D, 0x948E, 0x948F,
    0x9490, 0x9491, 0x9492, 0x9493, 0x9494, 0x9495, 0x9496, 0x9497, 0x9498, 0x9499,
    0x949A, 0x949B, 0x949C, 0x949D, 0x949E, 0x949F, 0x94A0, 0x94A1, 0x94A2, 0x94A3,
    0x94A4, 0x94A5, 0x94A6, 0x94A7, 0x94A8, 0x94A9, 0x94AA, 0x94AB, 0x94AC, 0x94AD,
    0x94AE, 0x94AF, 0x94B0, 0x94B1, 0x94B2, 0x94B3, 0x94B4, 0x94B5, 0x94B6, 0x94B7,
    0x94B8, 0x94B9, 0x94BA, 0x94BB, 0x94BC, 0x94BD, 0x94BE, 0x94BF, 0x94C0, 0x94C1,
    0x94C2, 0x94C3, 0x94C4, 0x94C5, 0x94C6, 0x94C7, 0x94C8, 0x94C9, 0x94CA, 0x94CB,
    0x94CC, 0x94CD, 0x94CE, 0x94CF, 0x94D0, 0x94D1, 0x94D2, 0x94D3, 0x94D4, 0x94D5,
    0x94D6, 0x94D7, 0x94D8, 0x94D9, 0x94DA, 0x94DB, 0x94DC, 0x94DD, 0x94DE, 0x94DF,
    0x94E0, 0x94E1, 0x94E2, 0x94E3, 0x94E4, 0x94E5, 0x94E6, 0x94E7, 0x94E8, 0x94E9,
    0x94EA, 0x94EB, 0x94EC, 0x94ED, 0x94EE, 0x94EF, 0x94F0, 0x94F1, 0x94F2, 0x94F3,
    0x94F4, 0x94F5, 0x94F6, 0x94F7, 0x94F8, 0x94F9, 0x94FA, 0x94FB, 0x94FC, 0x94FD,
    0x94FE, 0x94FF, 0x9500, 0x9501, 0x9502, 0x9503, 0x9504, 0x9505, 0x9506, 0x9507,
    0x9508, 0x9509, 0x950A, 0x950B, 0x950C, 0x950D, 0x950E, 0x950F, 0x9510, 0x9511,
    0x9512, 0x9513, 0x9514, 0x9515, 0x9516, 0x9517, 0x9518, 0x9519, 0x951A, 0x951B,
    0x951C, 0x951D, 0x951E, 0x951F, 0x9520, 0x9521, 0x9522, 0x9523, 0x9524, 0x9525,
    0x9526, 0x9527, 0x9528, 0x9529, 0x952A, 0x952B, 0x952C, 0x952D, 0x952E, 0x952F,
    0x9530, 0x9531, 0x9532, 0x9533, 0x9534, 0x9535, 0x9536, 0x9537, 0x9538, 0x9539,
    0x953A, 0x953B, 0x953C, 0x953D, 0x953E, 0x953F, 0x9540, 0x9541, 0x9542, 0x9543,
    0x9544, 0x9545, 0x9546, 0x9547, 0x9548, 0x9549, 0x954A, 0x954B, 0x954C, 0x954D,
    0x954E, 0x954F, 0x9550, 0x9551, 0x9552, 0x9553, 0x9554, 0x9555, 0x9556, 0x9557,
    0x9558, 0x9559, 0x955A, 0x955B, 0x955C, 0x955D, 0x955E, 0x955F, 0x9560, 0x9561,
    0x9562, 0x9563, 0x9564, 0x9565, 0x9566, 0x9567, 0x9568, 0x9569, 0x956A, 0x956B,
    0x956C, 0x956D, 0x956E, 0x956F, 0x9570, 0x9571, 0x9572, 0x9573, 0x9574, 0x9575,
    0x9576, 0x957F, 0x95E8, 0x95E9, 0x95EA, 0x95EB, 0x95EC, 0x95ED, 0x95EE, 0x95EF,
    0x95F0, 0x95F1, 0x95F2, 0x95F3, 0x95F4, 0x95F5, 0x95F6, 0x95F7, 0x95F8, 0x95F9,
    0x95FA, 0x95FB, 0x95FC, 0x95FD, 0x95FE, 0x95FF, 0x9600, 0x9601, 0x9602, 0x9603,
    0x9604, 0x9605, 0x9606, 0x9607, 0x9608, 0x9609, 0x960A, 0x960B, 0x960C, 0x960D,
    0x960E, 0x960F, 0x9610, 0x9611, 0x9612, 0x9613, 0x9614, 0x9615, 0x9616, 0x9617,
    0x9618, 0x9619, 0x961A, 0x961B, 0x961F, 0x9633, 0x9634, 0x9635, 0x9636, 0x9645,
    0x9646, 0x9647, 0x9648, 0x9649, 0x9655, 0x9666, 0x9667, 0x9668, 0x9669, 0x968F,
    0x9690, 0x96B6, 0x96BD, 0x96BE, 0x96C7, 0x96CF, 0x96E0, 0x96F3, 0x96FE, 0x9701,
    0x9709, 0x9721, 0x972D, 0x9753, 0x9754, 0x9759, 0x9765, 0x9791, 0x9792, 0x97AF,
    0x97B2, 0x97E6, 0x97E7, 0x97E8, 0x97E9, 0x97EA, 0x97EB, 0x97EC, 0x97F5, 0x9875,
    0x9876, 0x9877, 0x9878, 0x9879, 0x987A, 0x987B, 0x987C, 0x987D, 0x987E, 0x987F,
    0x9880, 0x9881, 0x9882, 0x9883, 0x9884, 0x9885, 0x9886, 0x9887, 0x9888, 0x9889,
    0x988A, 0x988B, 0x988C, 0x988D, 0x988E, 0x988F, 0x9890, 0x9891, 0x9892, 0x9893,
    0x9894, 0x9895, 0x9896, 0x9897, 0x9898, 0x9899, 0x989A, 0x989B, 0x989C, 0x989D,
    0x989E, 0x989F, 0x98A0, 0x98A1, 0x98A2, 0x98A3, 0x98A4, 0x98A5, 0x98A6, 0x98A7,
    0x98CE, 0x98CF, 0x98D0, 0x98D1, 0x98D2, 0x98D3, 0x98D4, 0x98D5, 0x98D6, 0x98D7,
    0x98D8, 0x98D9, 0x98DA, 0x98DE, 0x98E8, 0x990D, 0x9963, 0x9964, 0x9965, 0x9966,
    0x9967, 0x9968, 0x9969, 0x996A, 0x996B, 0x996C, 0x996D, 0x996E, 0x996F, 0x9970,
    0x9971, 0x9972, 0x9973, 0x9974, 0x9975, 0x9976, 0x9977, 0x9978, 0x9979, 0x997A,
    0x997B, 0x997C, 0x997D, 0x997E, 0x997F, 0x9980, 0x9981, 0x9982, 0x9983, 0x9984,
    0x9985, 0x9986, 0x9987, 0x9988, 0x9989, 0x998A, 0x998B, 0x998C, 0x998D, 0x998E,
    0x998F, 0x9990, 0x9991, 0x9992, 0x9993, 0x9994, 0x9995, 0x9A6C, 0x9A6D, 0x9A6E,
    0x9A6F, 0x9A70, 0x9A71, 0x9A72, 0x9A73, 0x9A74, 0x9A75, 0x9A76, 0x9A77, 0x9A78,
    0x9A79, 0x9A7A, 0x9A7B, 0x9A7C, 0x9A7D, 0x9A7E, 0x9A7F, 0x9A80, 0x9A81, 0x9A82,
    0x9A83, 0x9A84, 0x9A85, 0x9A86, 0x9A87, 0x9A88, 0x9A89, 0x9A8A, 0x9A8B, 0x9A8C,
    0x9A8D, 0x9A8E, 0x9A8F, 0x9A90, 0x9A91, 0x9A92, 0x9A93, 0x9A94, 0x9A95, 0x9A96,
    0x9A97, 0x9A98, 0x9A99, 0x9A9A, 0x9A9B, 0x9A9C, 0x9A9D, 0x9A9E, 0x9A9F, 0x9AA0,
    0x9AA1, 0x9AA2, 0x9AA3, 0x9AA4, 0x9AA5, 0x9AA6, 0x9AA7, 0x9AC5, 0x9ACB, 0x9ACC,
    0x9B13, 0x9B36, 0x9B47, 0x9B49, 0x9C7C, 0x9C7D, 0x9C7E, 0x9C7F, 0x9C80, 0x9C81,
    0x9C82, 0x9C83, 0x9C84, 0x9C85, 0x9C86, 0x9C87, 0x9C88, 0x9C89, 0x9C8A, 0x9C8B,
    0x9C8C, 0x9C8D, 0x9C8E, 0x9C8F, 0x9C90, 0x9C91, 0x9C92, 0x9C93, 0x9C94, 0x9C95,
    0x9C96, 0x9C97, 0x9C98, 0x9C99, 0x9C9A, 0x9C9B, 0x9C9C, 0x9C9D, 0x9C9E, 0x9C9F,
    0x9CA0, 0x9CA1, 0x9CA2, 0x9CA3, 0x9CA4, 0x9CA5, 0x9CA6, 0x9CA7, 0x9CA8, 0x9CA9,
    0x9CAA, 0x9CAB, 0x9CAC, 0x9CAD, 0x9CAE, 0x9CAF, 0x9CB0, 0x9CB1, 0x9CB2, 0x9CB3,
    0x9CB4, 0x9CB5, 0x9CB6, 0x9CB7, 0x9CB8, 0x9CB9, 0x9CBA, 0x9CBB, 0x9CBC, 0x9CBD,
    0x9CBE, 0x9CBF, 0x9CC0, 0x9CC1, 0x9CC2, 0x9CC3, 0x9CC4, 0x9CC5, 0x9CC6, 0x9CC7,
    0x9CC8, 0x9CC9, 0x9CCA, 0x9CCB, 0x9CCC, 0x9CCD, 0x9CCE, 0x9CCF, 0x9CD0, 0x9CD1,
    0x9CD2, 0x9CD3, 0x9CD4, 0x9CD5, 0x9CD6, 0x9CD7, 0x9CD8, 0x9CD9, 0x9CDA, 0x9CDB,
    0x9CDC, 0x9CDD, 0x9CDE, 0x9CDF, 0x9CE0, 0x9CE1, 0x9CE2, 0x9CE3, 0x9CE4, 0x9E1F,
    0x9E20, 0x9E21, 0x9E22, 0x9E23, 0x9E24, 0x9E25, 0x9E26, 0x9E27, 0x9E28, 0x9E29,
    0x9E2A, 0x9E2B, 0x9E2C, 0x9E2D, 0x9E2E, 0x9E2F, 0x9E30, 0x9E31, 0x9E32, 0x9E33,
    0x9E34, 0x9E35, 0x9E36, 0x9E37, 0x9E38, 0x9E39, 0x9E3A, 0x9E3B, 0x9E3C, 0x9E3D,
    0x9E3E, 0x9E3F, 0x9E40, 0x9E41, 0x9E42, 0x9E43, 0x9E44, 0x9E45, 0x9E46, 0x9E47,
    0x9E48, 0x9E49, 0x9E4A, 0x9E4B, 0x9E4C, 0x9E4D, 0x9E4E, 0x9E4F, 0x9E50, 0x9E51,
    0x9E52, 0x9E53, 0x9E54, 0x9E55, 0x9E56, 0x9E57, 0x9E58, 0x9E59, 0x9E5A, 0x9E5B,
    0x9E5C, 0x9E5D, 0x9E5E, 0x9E5F, 0x9E60, 0x9E61, 0x9E62, 0x9E63, 0x9E64, 0x9E65,
    0x9E66, 0x9E67, 0x9E68, 0x9E69, 0x9E6A, 0x9E6B, 0x9E6C, 0x9E6D, 0x9E6E, 0x9E6F,
    0x9E70, 0x9E71, 0x9E72, 0x9E73, 0x9E74, 0x9E7E, 0x9EA6, 0x9EB8, 0x9EB9, 0x9EBA,
    0x9EC4, 0x9EC9, 0x9EE1, 0x9EE9, 0x9EEA, 0x9EFE, 0x9F0B, 0x9F0C, 0x9F0D, 0x9F39,
    0x9F50, 0x9F51, 0x9F7F, 0x9F80, 0x9F81, 0x9F82, 0x9F83, 0x9F84, 0x9F85, 0x9F86,
    0x9F87, 0x9F88, 0x9F89, 0x9F8A, 0x9F8B, 0x9F8C, 0x9F99, 0x9F9A, 0x9F9B, 0x9F9F,
    0x9FCE, 0x9FCF, 0x9FD2, 0x9FD4, 0x2003E, 0x201B2, 0x201BF, 0x201F9, 0x20242, 0x20257,
    0x202C6, 0x206B3, 0x206C5, 0x206C6, 0x206FE, 0x20860, 0x20BB6, 0x20BDF, 0x20BE0, 0x20C31,
    0x20C37, 0x20C5E, 0x20CA5, 0x20D1B, 0x20D22, 0x20D78, 0x20D7E, 0x212C0, 0x212D7, 0x212E4,
    0x21363, 0x21484, 0x21760, 0x2178B, 0x217B1, 0x2181F, 0x21967, 0x21B5C, 0x21B6C, 0x21CC3,
    0x21CD2, 0x21DB4, 0x21E03, 0x21E83, 0x21E84, 0x222C8, 0x225D3, 0x22619, 0x2261D, 0x2261E,
    0x2264F, 0x22650, 0x22651, 0x22652, 0x22653, 0x226EF, 0x22801, 0x22890, 0x229D0, 0x22ACA,
    0x22ADE, 0x22AEC, 0x22B0D, 0x22B26, 0x22B4F, 0x22F7E, 0x230C1, 0x23190, 0x23223, 0x23368,
    0x2336F, 0x23370, 0x23391, 0x233E2, 0x23415, 0x23424, 0x23476, 0x2348C, 0x234FF, 0x2350C,
    0x235CA, 0x235CB, 0x235D9, 0x23610, 0x23613, 0x23634, 0x23637, 0x2369A, 0x2378E, 0x23A3C,
    0x23B64, 0x23BE3, 0x23C5D, 0x23C97, 0x23C98, 0x23CC6, 0x23DA9, 0x23DAB, 0x23DAD, 0x23DF7,
    0x23E23, 0x23EBC, 0x23EBD, 0x23F77, 0x241A1, 0x241A2, 0x241C3, 0x241C4, 0x241ED, 0x241F9,
    0x24236, 0x24237, 0x24280, 0x242B0, 0x242CF, 0x243BA, 0x243BB, 0x2466F, 0x24762, 0x24783,
    0x247A4, 0x2480B, 0x24980, 0x24A7D, 0x24CC4, 0x24D8A, 0x24DA7, 0x24ECA, 0x24F6F, 0x24F80,
    0x24FF2, 0x25062, 0x25158, 0x25174, 0x2517F, 0x251A7, 0x251E2, 0x2539D, 0x2541F, 0x2542F,
    0x25430, 0x2543B, 0x257A6, 0x259C2, 0x25A5F, 0x25A7A, 0x25AE3, 0x25B00, 0x25B1E, 0x25B20,
    0x25B49, 0x25B8B, 0x25B9C, 0x25BBE, 0x25C54, 0x25E65, 0x25E85, 0x25E87, 0x26208, 0x26209,
    0x2620B, 0x2620C, 0x2620E, 0x2620F, 0x26210, 0x26211, 0x26212, 0x26213, 0x26214, 0x26215,
    0x26216, 0x26217, 0x26218, 0x26219, 0x2621A, 0x2621B, 0x2621C, 0x2621D, 0x2621E, 0x2621F,
    0x26220, 0x26221, 0x26360, 0x266E8, 0x2677C, 0x267D7, 0x26A29, 0x26C0F, 0x26C34, 0x26D9F,
    0x26DBB, 0x26ED5, 0x27250, 0x2725E, 0x27325, 0x273D6, 0x273D7, 0x2744F, 0x274AD, 0x2772D,
    0x2775D, 0x27767, 0x27BAA, 0x27CD5, 0x27E51, 0x27E52, 0x27E53, 0x27E54, 0x27E55, 0x27E56,
    0x27E57, 0x27FC8, 0x28001, 0x28031, 0x28074, 0x280BA, 0x28104, 0x2815B, 0x2816B, 0x2816C,
    0x28257, 0x28405, 0x28406, 0x28407, 0x28408, 0x28409, 0x2840A, 0x28479, 0x287F3, 0x28828,
    0x28859, 0x2887A, 0x28930, 0x28C3E, 0x28C3F, 0x28C40, 0x28C41, 0x28C42, 0x28C43, 0x28C44,
    0x28C45, 0x28C46, 0x28C47, 0x28C48, 0x28C49, 0x28C4A, 0x28C4B, 0x28C4C, 0x28C4D, 0x28C4E,
    0x28C4F, 0x28C50, 0x28C51, 0x28C52, 0x28C53, 0x28C54, 0x28C55, 0x28C56, 0x28DFF, 0x28E00,
    0x28E01, 0x28E02, 0x28E03, 0x28E04, 0x28E05, 0x28E06, 0x28E07, 0x28E09, 0x28E0A, 0x28E0B,
    0x28E0C, 0x28E0E, 0x28E18, 0x28E1F, 0x293FC, 0x293FD, 0x293FE, 0x293FF, 0x29400, 0x294CB,
    0x29595, 0x29596, 0x29597, 0x29665, 0x29666, 0x29667, 0x29668, 0x29669, 0x2966A, 0x2966B,
    0x2966C, 0x2966D, 0x2966E, 0x2966F, 0x29670, 0x297FF, 0x29800, 0x29801, 0x29802, 0x29803,
    0x29805, 0x29806, 0x29807, 0x29808, 0x29809, 0x2980A, 0x2980B, 0x2980C, 0x2980E, 0x2980F,
    0x29820, 0x29856, 0x299E6, 0x299E8, 0x299E9, 0x299EA, 0x299EB, 0x299EC, 0x299ED, 0x299EE,
    0x299EF, 0x299F0, 0x299F1, 0x299F2, 0x299F3, 0x299F4, 0x299F5, 0x299F6, 0x299F8, 0x299FA,
    0x299FB, 0x299FC, 0x299FF, 0x29A00, 0x29A01, 0x29A02, 0x29A03, 0x29A04, 0x29A05, 0x29A06,
    0x29A07, 0x29A08, 0x29A09, 0x29A0A, 0x29A0B, 0x29A0C, 0x29A0D, 0x29A0E, 0x29A0F, 0x29A10,
    0x29A48, 0x29B23, 0x29B24, 0x29B79, 0x29BD2, 0x29C30, 0x29C92, 0x29D0C, 0x29F79, 0x29F7A,
    0x29F7B, 0x29F7C, 0x29F7D, 0x29F7E, 0x29F7F, 0x29F81, 0x29F82, 0x29F83, 0x29F84, 0x29F85,
    0x29F86, 0x29F87, 0x29F88, 0x29F8A, 0x29F8B, 0x29F8C, 0x29F8E, 0x2A242, 0x2A243, 0x2A244,
    0x2A245, 0x2A246, 0x2A248, 0x2A249, 0x2A24A, 0x2A24B, 0x2A24C, 0x2A24D, 0x2A24E, 0x2A24F,
    0x2A250, 0x2A251, 0x2A252, 0x2A254, 0x2A255, 0x2A388, 0x2A389, 0x2A38A, 0x2A38B, 0x2A38C,
    0x2A445, 0x2A52D, 0x2A68F, 0x2A690, 0x2A70E, 0x2A79D, 0x2A7CE, 0x2A7DD, 0x2A800, 0x2A81F,
    0x2A821, 0x2A833, 0x2A835, 0x2A838, 0x2A83A, 0x2A83D, 0x2A840, 0x2A843, 0x2A84B, 0x2A84F,
    0x2A85B, 0x2A85E, 0x2A87A, 0x2A88C, 0x2A890, 0x2A892, 0x2A895, 0x2A896, 0x2A8A0, 0x2A8AE,
    0x2A8B8, 0x2A8C6, 0x2A8D2, 0x2A8FB, 0x2A904, 0x2A91A, 0x2A960, 0x2A96B, 0x2A970, 0x2A97F,
    0x2A9C0, 0x2A9D8, 0x2AA0A, 0x2AA17, 0x2AA27, 0x2AA29, 0x2AA36, 0x2AA37, 0x2AA39, 0x2AA47,
    0x2AA4E, 0x2AA58, 0x2AA5B, 0x2AA77, 0x2AA78, 0x2AA8F, 0x2AA91, 0x2AA9E, 0x2AAB4, 0x2AABC,
    0x2AACC, 0x2AAE1, 0x2AAF7, 0x2AAFA, 0x2AB1A, 0x2AB2F, 0x2AB5D, 0x2AB62, 0x2AB67, 0x2AB6F,
    0x2AB75, 0x2AB7E, 0x2AB83, 0x2AB8B, 0x2AB96, 0x2ABB3, 0x2ABB6, 0x2ABCB, 0x2AC36, 0x2AC65,
    0x2AC77, 0x2AC8E, 0x2AC94, 0x2AC9B, 0x2ACAE, 0x2ACCD, 0x2ACD7, 0x2AD19, 0x2AD51, 0x2AD63,
    0x2AD71, 0x2AD84, 0x2AD92, 0x2ADAE, 0x2ADCD, 0x2ADFD, 0x2AE15, 0x2AE29, 0x2AE40, 0x2AE60,
    0x2AE73, 0x2AE79, 0x2AEA3, 0x2AEAA, 0x2AEAD, 0x2AEB7, 0x2AEB8, 0x2AEBB, 0x2AEBD, 0x2AED0,
    0x2AEE8, 0x2AEF2, 0x2AEFA, 0x2AF0B, 0x2AF34, 0x2AF48, 0x2AF5D, 0x2AF6A, 0x2AF6D, 0x2AF6E,
    0x2AF74, 0x2AF77, 0x2AF94, 0x2AFA2, 0x2AFA3, 0x2AFA6, 0x2AFB8, 0x2AFCA, 0x2AFDE, 0x2AFEB,
    0x2AFF5, 0x2B00C, 0x2B013, 0x2B028, 0x2B02C, 0x2B02E, 0x2B042, 0x2B05F, 0x2B061, 0x2B071,
    0x2B072, 0x2B073, 0x2B077, 0x2B07A, 0x2B083, 0x2B086, 0x2B088, 0x2B096, 0x2B0BF, 0x2B0D7,
    0x2B119, 0x2B11A, 0x2B11B, 0x2B11C, 0x2B11D, 0x2B11E, 0x2B11F, 0x2B120, 0x2B121, 0x2B122,
    0x2B123, 0x2B124, 0x2B125, 0x2B126, 0x2B127, 0x2B128, 0x2B129, 0x2B12A, 0x2B12B, 0x2B12C,
    0x2B12D, 0x2B12E, 0x2B12F, 0x2B130, 0x2B131, 0x2B132, 0x2B133, 0x2B134, 0x2B135, 0x2B136,
    0x2B137, 0x2B138, 0x2B139, 0x2B145, 0x2B157, 0x2B165, 0x2B16D, 0x2B17C, 0x2B18F, 0x2B19D,
    0x2B1AB, 0x2B1D8, 0x2B1DB, 0x2B1EA, 0x2B1ED, 0x2B1F4, 0x2B1FD, 0x2B209, 0x2B20E, 0x2B21F,
    0x2B235, 0x2B241, 0x2B244, 0x2B2AA, 0x2B2AE, 0x2B2B8, 0x2B2B9, 0x2B2BB, 0x2B2C7, 0x2B2CC,
    0x2B2F2, 0x2B2F7, 0x2B2F9, 0x2B2FB, 0x2B300, 0x2B307, 0x2B30B, 0x2B328, 0x2B32A, 0x2B32B,
    0x2B32C, 0x2B32D, 0x2B32F, 0x2B350, 0x2B359, 0x2B35A, 0x2B35B, 0x2B35C, 0x2B35D, 0x2B35E,
    0x2B35F, 0x2B360, 0x2B361, 0x2B362, 0x2B363, 0x2B364, 0x2B365, 0x2B366, 0x2B367, 0x2B368,
    0x2B369, 0x2B36A, 0x2B36B, 0x2B36C, 0x2B36D, 0x2B36E, 0x2B36F, 0x2B370, 0x2B371, 0x2B372,
    0x2B373, 0x2B374, 0x2B375, 0x2B376, 0x2B377, 0x2B378, 0x2B379, 0x2B37A, 0x2B37B, 0x2B37C,
    0x2B37D, 0x2B37E, 0x2B37F, 0x2B386, 0x2B38C, 0x2B3A6, 0x2B3A7, 0x2B3A8, 0x2B3A9, 0x2B3AA,
    0x2B3AB, 0x2B3AC, 0x2B3AD, 0x2B3B1, 0x2B3B3, 0x2B3B8, 0x2B3BA, 0x2B3C3, 0x2B3C6, 0x2B3CB,
    0x2B3CC, 0x2B3D0, 0x2B3D1, 0x2B3D5, 0x2B3DE, 0x2B3E8, 0x2B404, 0x2B405, 0x2B406, 0x2B407,
    0x2B408, 0x2B409, 0x2B40A, 0x2B40B, 0x2B40C, 0x2B40D, 0x2B40E, 0x2B40F, 0x2B410, 0x2B411,
    0x2B412, 0x2B413, 0x2B414, 0x2B415, 0x2B416, 0x2B417, 0x2B418, 0x2B419, 0x2B437, 0x2B458,
    0x2B461, 0x2B477, 0x2B4E5, 0x2B4E6, 0x2B4E7, 0x2B4E8, 0x2B4E9, 0x2B4EA, 0x2B4EB, 0x2B4EC,
    0x2B4ED, 0x2B4EE, 0x2B4EF, 0x2B4F0, 0x2B4F1, 0x2B4F2, 0x2B4F3, 0x2B4F4, 0x2B4F5, 0x2B4F6,
    0x2B4F7, 0x2B4F8, 0x2B4F9, 0x2B4FA, 0x2B4FB, 0x2B4FC, 0x2B4FD, 0x2B4FE, 0x2B4FF, 0x2B500,
    0x2B501, 0x2B502, 0x2B503, 0x2B504, 0x2B505, 0x2B506, 0x2B507, 0x2B508, 0x2B509, 0x2B50A,
    0x2B50B, 0x2B50C, 0x2B50D, 0x2B50E, 0x2B50F, 0x2B510, 0x2B511, 0x2B512, 0x2B513, 0x2B514,
    0x2B515, 0x2B516, 0x2B52D, 0x2B52E, 0x2B52F, 0x2B530, 0x2B532, 0x2B534, 0x2B535, 0x2B536,
    0x2B53D, 0x2B55A, 0x2B565, 0x2B568, 0x2B583, 0x2B585, 0x2B587, 0x2B591, 0x2B592, 0x2B593,
    0x2B594, 0x2B595, 0x2B596, 0x2B5AA, 0x2B5AB, 0x2B5AC, 0x2B5AD, 0x2B5AE, 0x2B5AF, 0x2B5B0,
    0x2B5B1, 0x2B5B2, 0x2B5B3, 0x2B5B4, 0x2B5B5, 0x2B5B6, 0x2B5B7, 0x2B5B8, 0x2B5B9, 0x2B5BA,
    0x2B5C7, 0x2B5C8, 0x2B5C9, 0x2B5CA, 0x2B5CB, 0x2B5DA, 0x2B5DE, 0x2B5DF, 0x2B5E0, 0x2B5E1,
    0x2B5E2, 0x2B5E3, 0x2B5E4, 0x2B5E5, 0x2B5E6, 0x2B5E7, 0x2B5E8, 0x2B5E9, 0x2B5EA, 0x2B5EB,
    0x2B5EC, 0x2B5ED, 0x2B5EE, 0x2B5EF, 0x2B5F0, 0x2B5F1, 0x2B5F3, 0x2B5F4, 0x2B5F5, 0x2B61B,
    0x2B61C, 0x2B61D, 0x2B61E, 0x2B61F, 0x2B620, 0x2B621, 0x2B623, 0x2B624, 0x2B625, 0x2B626,
    0x2B627, 0x2B628, 0x2B629, 0x2B62A, 0x2B62B, 0x2B62C, 0x2B62D, 0x2B62E, 0x2B62F, 0x2B630,
    0x2B631, 0x2B63D, 0x2B642, 0x2B688, 0x2B689, 0x2B68A, 0x2B68B, 0x2B68C, 0x2B68D, 0x2B68E,
    0x2B68F, 0x2B690, 0x2B691, 0x2B692, 0x2B693, 0x2B694, 0x2B695, 0x2B696, 0x2B697, 0x2B698,
    0x2B699, 0x2B69A, 0x2B69B, 0x2B69C, 0x2B69D, 0x2B69E, 0x2B69F, 0x2B6A0, 0x2B6A1, 0x2B6A2,
    0x2B6A3, 0x2B6A4, 0x2B6A5, 0x2B6A6, 0x2B6A7, 0x2B6A8, 0x2B6A9, 0x2B6AA, 0x2B6AB, 0x2B6AC,
    0x2B6AD, 0x2B6DA, 0x2B6DB, 0x2B6DC, 0x2B6DD, 0x2B6DE, 0x2B6DF, 0x2B6E0, 0x2B6E1, 0x2B6E2,
    0x2B6E3, 0x2B6E4, 0x2B6E5, 0x2B6E6, 0x2B6E7, 0x2B6E8, 0x2B6E9, 0x2B6EA, 0x2B6EB, 0x2B6EC,
    0x2B6ED, 0x2B6EE, 0x2B6EF, 0x2B6F0, 0x2B6F1, 0x2B6F2, 0x2B6F3, 0x2B6F4, 0x2B6F5, 0x2B6F6,
    0x2B6F7, 0x2B6F8, 0x2B6F9, 0x2B6FA, 0x2B6FB, 0x2B6FC, 0x2B6FD, 0x2B6FE, 0x2B700, 0x2B701,
    0x2B702, 0x2B703, 0x2B704, 0x2B705, 0x2B70A, 0x2B711, 0x2B712, 0x2B713, 0x2B714, 0x2B715,
    0x2B719, 0x2B71F, 0x2B728, 0x2B729, 0x2B72A, 0x2B72B, 0x2B72C, 0x2B72D, 0x2B72E, 0x2B72F,
    0x2B730, 0x2B732, 0x2B733, 0x2B748, 0x2B74B, 0x2B766, 0x2B767, 0x2B768, 0x2B769, 0x2B76A,
    0x2B76B, 0x2B76C, 0x2B76D, 0x2B76E, 0x2B775, 0x2B785, 0x2B797, 0x2B79A, 0x2B79B, 0x2B79D,
    0x2B7A0, 0x2B7A1, 0x2B7A2, 0x2B7A3, 0x2B7A5, 0x2B7A6, 0x2B7A7, 0x2B7A8, 0x2B7A9, 0x2B7B7,
    0x2B7C3, 0x2B7C4, 0x2B7C5, 0x2B7C6, 0x2B7C7, 0x2B7D1, 0x2B7D5, 0x2B7DE, 0x2B7DF, 0x2B7E0,
    0x2B7E1, 0x2B7E2, 0x2B7E4, 0x2B7E5, 0x2B7E6, 0x2B7EB, 0x2B7EC, 0x2B7F2, 0x2B7F3, 0x2B7F4,
    0x2B7F5, 0x2B7F6, 0x2B7F7, 0x2B7F8, 0x2B7F9, 0x2B7FA, 0x2B7FB, 0x2B7FC, 0x2B7FD, 0x2B7FE,
    0x2B7FF, 0x2B800, 0x2B801, 0x2B802, 0x2B805, 0x2B806, 0x2B807, 0x2B808, 0x2B80A, 0x2B80B,
    0x2B80C, 0x2B80F, 0x2B810, 0x2B811, 0x2B812, 0x2B816, 0x2B81C, 0x2B8B8, 0x2B9C3, 0x2B9EE,
    0x2BAC7, 0x2BB10, 0x2BB5F, 0x2BB62, 0x2BB7C, 0x2BB83, 0x2BC1B, 0x2BD77, 0x2BD87, 0x2BDF7,
    0x2BE29, 0x2C029, 0x2C02A, 0x2C0A9, 0x2C0CA, 0x2C1D5, 0x2C1D9, 0x2C1F9, 0x2C27C, 0x2C288,
    0x2C2A4, 0x2C35B, 0x2C361, 0x2C364, 0x2C488, 0x2C497, 0x2C542, 0x2C613, 0x2C618, 0x2C621,
    0x2C629, 0x2C62B, 0x2C62C, 0x2C62D, 0x2C62F, 0x2C642, 0x2C64A, 0x2C64B, 0x2C72C, 0x2C72F,
    0x2C79F, 0x2C7C1, 0x2C7FD, 0x2C8D9, 0x2C8DE, 0x2C8E1, 0x2C8F3, 0x2C907, 0x2C90A, 0x2C91D,
    0x2CA02, 0x2CA0E, 0x2CA7D, 0x2CAA9, 0x2CB29, 0x2CB2D, 0x2CB2E, 0x2CB31, 0x2CB38, 0x2CB39,
    0x2CB3B, 0x2CB3F, 0x2CB41, 0x2CB4A, 0x2CB4E, 0x2CB5A, 0x2CB5B, 0x2CB64, 0x2CB69, 0x2CB6C,
    0x2CB6D, 0x2CB6F, 0x2CB73, 0x2CB76, 0x2CB78, 0x2CB7C, 0x2CBB1, 0x2CBBF, 0x2CBC0, 0x2CBCE,
    0x2CC56, 0x2CC5F, 0x2CCF5, 0x2CCF6, 0x2CCFD, 0x2CCFF, 0x2CD02, 0x2CD03, 0x2CD0A, 0x2CD8B,
    0x2CD8D, 0x2CD8F, 0x2CD90, 0x2CD9F, 0x2CDA0, 0x2CDA8, 0x2CDAD, 0x2CDAE, 0x2CDD5, 0x2CE18,
    0x2CE1A, 0x2CE23, 0x2CE26, 0x2CE2A, 0x2CE2F, 0x2CE7C, 0x2CE88, 0x2CE93, 0x30B38, 0x30C28,
    0x30D8E, 0x30F84, 0x30FAD, 0x3129C,
};

inline constexpr std::array<char32_t, 4093> traditional_only = {
    0x346E, 0x346F, 0x3473, 0x3476, 0x3493, 0x34C4, 0x34E8, 0x350B, 0x35AE, 0x35F2,
    0x35FF, 0x3609, 0x3613, 0x3614, 0x361A, 0x36DD, 0x3704, 0x370F, 0x3710, 0x3717,
    0x3722, 0x3737, 0x379E, 0x37FA, 0x380F, 0x3823, 0x3897, 0x389D, 0x396E, 0x398E,
    0x399B, 0x399E, 0x3A3B, 0x3A4B, 0x3A5C, 0x3A73, 0x3A75, 0x3A8E, 0x3BE4, 0x3C19,
    0x3D57, 0x3D7E, 0x3D86, 0x3DCD, 0x3DFF, 0x3E07, 0x3E7D, 0x3E8F, 0x3E9C, 0x3EF6,
    0x3FD6, 0x3FD7, 0x3FE7, 0x4009, 0x4039, 0x406A, 0x407B, 0x408E, 0x40EE, 0x4150,
    0x4173, 0x4189, 0x4251, 0x4259, 0x426C, 0x4272, 0x4276, 0x42AD, 0x42B7, 0x42BA,
    0x42C3, 0x42D4, 0x42D9, 0x42DA, 0x42E6, 0x42F9, 0x42FB, 0x42FC, 0x42FF, 0x4308,
    0x430B, 0x4316, 0x431D, 0x431F, 0x4325, 0x4330, 0x4364, 0x4366, 0x437D, 0x4399,
    0x43B1, 0x44E3, 0x4564, 0x4573, 0x4585, 0x45C5, 0x45FF, 0x4654, 0x4661, 0x4671,
    0x46A9, 0x46C4, 0x46F3, 0x4700, 0x4716, 0x476D, 0x477B, 0x477C, 0x4788, 0x478B,
    0x4793, 0x47C3, 0x47C6, 0x47D0, 0x4806, 0x4831, 0x4850, 0x4869, 0x4875, 0x48A8,
    0x4924, 0x4944, 0x4947, 0x4951, 0x4955, 0x4957, 0x4969, 0x496F, 0x4971, 0x4998,
    0x499B, 0x499F, 0x49AF, 0x49B3, 0x49E2, 0x4A8A, 0x4A8F, 0x4A97, 0x4A98, 0x4AB4,
    0x4ABE, 0x4AC0, 0x4AC2, 0x4ADF, 0x4AF4, 0x4AF6, 0x4AFB, 0x4AFE, 0x4B13, 0x4B18,
    0x4B1D, 0x4B1E, 0x4B27, 0x4B40, 0x4B43, 0x4B51, 0x4B54, 0x4B7F, 0x4B84, 0x4B9D,
    0x4B9E, 0x4BA0, 0x4BAB, 0x4BB0, 0x4BB3, 0x4BBE, 0x4BC0, 0x4BE4, 0x4C3E, 0x4C40,
    0x4C41, 0x4C59, 0x4C67, 0x4C6C, 0x4C70, 0x4C77, 0x4C78, 0x4C7D, 0x4C81, 0x4C85,
    0x4C96, 0x4C98, 0x4CB0, 0x4CDC, 0x4CE2, 0x4CE4, 0x4CE7, 0x4CEB, 0x4D09, 0x4D0B,
    0x4D2C, 0x4D31, 0x4D34, 0x4D3D, 0x4D73, 0x4D74, 0x4D95, 0x4DB2, 0x4E1F, 0x4E26,
    0x4E82, 0x4E99, 0x4E9E, 0x4F47, 0x4F48, 0x4F54, 0x4F75, 0x4F86, 0x4F96, 0x4FB6,
    0x4FB7, 0x4FC1, 0x4FC2, 0x4FD3, 0x4FD4, 0x4FE0, 0x4FE5, 0x4FEC, 0x5000, 0x5006,
    0x5008, 0x5009, 0x500B, 0x5011, 0x5016, 0x502B, 0x5032, 0x5049, 0x5051, 0x5074,
    0x5075, 0x507D, 0x508C, 0x5091, 0x5096, 0x5098, 0x5099, 0x50A2, 0x50AD, 0x50AF,
    0x50B3, 0x50B4, 0x50B5, 0x50B7, 0x50BE, 0x50C2, 0x50C5, 0x50C9, 0x50D1, 0x50D5,
    0x50DE, 0x50E4, 0x50E5, 0x50E8, 0x50F1, 0x50F9, 0x5100, 0x5101, 0x5102, 0x5104,
    0x5108, 0x5109, 0x510E, 0x5110, 0x5114, 0x5115, 0x5118, 0x511F, 0x5123, 0x512A,
    0x512D, 0x5132, 0x5137, 0x5138, 0x513A, 0x513B, 0x513C, 0x5147, 0x514C, 0x5152,
    0x5157, 0x5167, 0x5169, 0x518A, 0x5191, 0x51AA, 0x51C8, 0x51CD, 0x51D9, 0x51DC,
    0x51F1, 0x5225, 0x522A, 0x5244, 0x5247, 0x524E, 0x5257, 0x525B, 0x525D, 0x526E,
    0x5274, 0x5275, 0x5277, 0x527E, 0x5283, 0x5287, 0x5289, 0x528A, 0x528C, 0x528D,
    0x528F, 0x5291, 0x529A, 0x52C1, 0x52D1, 0x52D5, 0x52D9, 0x52DB, 0x52DD, 0x52DE,
    0x52E2, 0x52E3, 0x52E9, 0x52F1, 0x52F3, 0x52F5, 0x52F8, 0x52FB, 0x532D, 0x532F,
    0x5331, 0x5340, 0x5354, 0x5379, 0x537B, 0x537D, 0x5399, 0x53A0, 0x53A4, 0x53AD,
    0x53B2, 0x53B4, 0x53C3, 0x53C4, 0x53E2, 0x5412, 0x5433, 0x5436, 0x5442, 0x54BC,
    0x54E1, 0x54EF, 0x5504, 0x5513, 0x5538, 0x554F, 0x5553, 0x555E, 0x555F, 0x5562,
    0x558E, 0x559A, 0x55AA, 0x55AB, 0x55AC, 0x55AE, 0x55B2, 0x55C6, 0x55C7, 0x55CA,
    0x55CE, 0x55DA, 0x55E9, 0x55F0, 0x55F6, 0x55F9, 0x5606, 0x560D, 0x5613, 0x5614,
    0x5616, 0x5617, 0x561C, 0x5629, 0x562A, 0x562E, 0x562F, 0x5630, 0x5633, 0x5635,
    0x5638, 0x563A, 0x563D, 0x5641, 0x5645, 0x5653, 0x565A, 0x565D, 0x565E, 0x5660,
    0x5665, 0x5666, 0x566F, 0x5672, 0x5674, 0x5678, 0x5679, 0x5680, 0x5687, 0x568C,
    0x5690, 0x5695, 0x5699, 0x569B, 0x56A5, 0x56A6, 0x56A7, 0x56A8, 0x56AE, 0x56B2,
    0x56B3, 0x56B4, 0x56B6, 0x56BD, 0x56C0, 0x56C1, 0x56C2, 0x56C3, 0x56C5, 0x56C8,
    0x56C9, 0x56CC, 0x56D1, 0x56D2, 0x56EA, 0x5707, 0x570B, 0x570D, 0x5712, 0x5713,
    0x5716, 0x5718, 0x571E, 0x57BB, 0x57E1, 0x57E8, 0x57EC, 0x57F0, 0x57F7, 0x5805,
    0x580A, 0x5816, 0x581A, 0x581D, 0x582F, 0x5831, 0x5834, 0x584A, 0x584B, 0x584F,
    0x5852, 0x5857, 0x585A, 0x5862, 0x5864, 0x5875, 0x5878, 0x5879, 0x587F, 0x588A,
    0x589C, 0x58A0, 0x58AE, 0x58B0, 0x58B2, 0x58B3, 0x58B6, 0x58BB, 0x58BE, 0x58C7,
    0x58C8, 0x58CB, 0x58CE, 0x58D3, 0x58D7, 0x58D8, 0x58D9, 0x58DA, 0x58DC, 0x58DE,
    0x58DF, 0x58E0, 0x58E2, 0x58E3, 0x58E9, 0x58EA, 0x58EF, 0x58FA, 0x58FC, 0x58FD,
    0x5920, 0x5922, 0x593E, 0x5950, 0x5967, 0x5969, 0x596A, 0x596C, 0x596E, 0x597C,
    0x599D, 0x59CD, 0x59E6, 0x5A19, 0x5A1B, 0x5A41, 0x5A61, 0x5A66, 0x5A6D, 0x5A88,
    0x5AA7, 0x5AAF, 0x5AB0, 0x5ABC, 0x5ABD, 0x5ACB, 0x5AD7, 0x5AF5, 0x5AFA, 0x5AFB,
    0x5AFF, 0x5B00, 0x5B03, 0x5B07, 0x5B08, 0x5B0B, 0x5B0C, 0x5B19, 0x5B21, 0x5B23,
    0x5B24, 0x5B26, 0x5B2A, 0x5B30, 0x5B38, 0x5B3B, 0x5B43, 0x5B44, 0x5B46, 0x5B47,
    0x5B4B, 0x5B4C, 0x5B4E, 0x5B6B, 0x5B78, 0x5B7B, 0x5B7E, 0x5B7F, 0x5BAE, 0x5BC0,
    0x5BE0, 0x5BE2, 0x5BE6, 0x5BE7, 0x5BE9, 0x5BEB, 0x5BEC, 0x5BF5, 0x5BF6, 0x5C07,
    0x5C08, 0x5C0B, 0x5C0D, 0x5C0E, 0x5C37, 0x5C46, 0x5C4D, 0x5C53, 0x5C5C, 0x5C62,
    0x5C64, 0x5C68, 0x5C69, 0x5C6C, 0x5CA1, 0x5CEF, 0x5CF4, 0x5CF6, 0x5CFD, 0x5D0D,
    0x5D11, 0x5D17, 0x5D19, 0x5D22, 0x5D2C, 0x5D50, 0x5D57, 0x5D7C, 0x5D7D, 0x5D7E,
    0x5D81, 0x5D84, 0x5D87, 0x5D88, 0x5D94, 0x5D97, 0x5D98, 0x5DA0, 0x5DA2, 0x5DA7,
    0x5DA8, 0x5DAE, 0x5DB8, 0x5DB9, 0x5DBA, 0x5DBC, 0x5DBD, 0x5DCA, 0x5DCB, 0x5DD2,
    0x5DD4, 0x5DD6, 0x5DD7, 0x5DD8, 0x5DF0, 0x5DF9, 0x5E25, 0x5E2B, 0x5E33, 0x5E36,
    0x5E40, 0x5E43, 0x5E53, 0x5E57, 0x5E58, 0x5E5D, 0x5E5F, 0x5E63, 0x5E69, 0x5E6B,
    0x5E6C, 0x5E79, 0x5E7E, 0x5EAB, 0x5EC1, 0x5EC2, 0x5EC4, 0x5EC8, 0x5ECE, 0x5ED5,
    0x5EDA, 0x5EDD, 0x5EDE, 0x5EDF, 0x5EE0, 0x5EE1, 0x5EE2, 0x5EE3, 0x5EE7, 0x5EE9,
    0x5EEC, 0x5EF3, 0x5F12, 0x5F14, 0x5F33, 0x5F35, 0x5F37, 0x5F43, 0x5F44, 0x5F46,
    0x5F48, 0x5F4C, 0x5F4E, 0x5F54, 0x5F59, 0x5F60, 0x5F65, 0x5F6B, 0x5F72, 0x5F7F,
    0x5F8C, 0x5F91, 0x5F9E, 0x5FA0, 0x5FA9, 0x5FB9, 0x5FBF, 0x6046, 0x6065, 0x6085,
    0x609E, 0x60B5, 0x60B6, 0x60BD, 0x60E1, 0x60F1, 0x60F2, 0x60FB, 0x611B, 0x611C,
    0x6128, 0x6134, 0x6137, 0x613B, 0x613E, 0x6144, 0x614B, 0x614D, 0x6158, 0x615A,
    0x615F, 0x6163, 0x6164, 0x616A, 0x616B, 0x616E, 0x6173, 0x6176, 0x617A, 0x617C,
    0x617E, 0x6182, 0x618A, 0x6190, 0x6191, 0x6192, 0x6196, 0x619A, 0x61A2, 0x61A4,
    0x61AB, 0x61AE, 0x61B2, 0x61B6, 0x61B8, 0x61B9, 0x61C0, 0x61C7, 0x61C9, 0x61CC,
    0x61CD, 0x61CE, 0x61DE, 0x61DF, 0x61E3, 0x61E4, 0x61E8, 0x61F2, 0x61F6, 0x61F7,
    0x61F8, 0x61FA, 0x61FC, 0x61FE, 0x6200, 0x6207, 0x6214, 0x6227, 0x6229, 0x6230,
    0x6231, 0x6232, 0x6236, 0x62CB, 0x6329, 0x6331, 0x633E, 0x6368, 0x636B, 0x6371,
    0x6372, 0x6383, 0x6384, 0x6386, 0x6397, 0x6399, 0x639A, 0x639B, 0x63A1, 0x63C0,
    0x63DA, 0x63DB, 0x63EE, 0x63EF, 0x640D, 0x6416, 0x6417, 0x6435, 0x6436, 0x644B,
    0x6450, 0x6451, 0x645C, 0x645F, 0x646F, 0x6473, 0x6476, 0x647A, 0x647B, 0x6488,
    0x648A, 0x648F, 0x6490, 0x6493, 0x649D, 0x649F, 0x64A3, 0x64A5, 0x64A7, 0x64AB,
    0x64B2, 0x64B3, 0x64BB, 0x64BE, 0x64BF, 0x64C1, 0x64C4, 0x64C7, 0x64CA, 0x64CB,
    0x64D3, 0x64D4, 0x64DA, 0x64DF, 0x64E0, 0x64E3, 0x64EB, 0x64EC, 0x64EF, 0x64F0,
    0x64F1, 0x64F2, 0x64F4, 0x64F7, 0x64FA, 0x64FB, 0x64FC, 0x64FD, 0x64FE, 0x6504,
    0x6506, 0x650B, 0x650F, 0x6514, 0x6516, 0x6519, 0x651B, 0x651C, 0x651D, 0x6522,
    0x6523, 0x6524, 0x652A, 0x652C, 0x654E, 0x6553, 0x6557, 0x6558, 0x6575, 0x6578,
    0x6582, 0x6583, 0x6585, 0x6586, 0x6595, 0x65AC, 0x65B7, 0x65B8, 0x65C2, 0x65E3,
    0x6607, 0x6642, 0x6649, 0x665B, 0x665D, 0x6688, 0x6689, 0x6690, 0x6698, 0x66A2,
    0x66AB, 0x66C4, 0x66C6, 0x66C7, 0x66C9, 0x66CA, 0x66CF, 0x66D6, 0x66E0, 0x66E5,
    0x66E8, 0x66EC, 0x66F8, 0x6703, 0x6725, 0x6727, 0x672E, 0x6771, 0x67B4, 0x67F5,
    0x67FA, 0x67FB, 0x6871, 0x687F, 0x6894, 0x6896, 0x6898, 0x689C, 0x689D, 0x689F,
    0x68B2, 0x68C4, 0x68CA, 0x68D6, 0x68D7, 0x68DF, 0x68E1, 0x68E7, 0x68F2, 0x68F6,
    0x690F, 0x6932, 0x6947, 0x694A, 0x6953, 0x6968, 0x696D, 0x6975, 0x6998, 0x69A6,
    0x69AA, 0x69AE, 0x69B2, 0x69BF, 0x69CB, 0x69CD, 0x69D3, 0x69E4, 0x69E7, 0x69E8,
    0x69EB, 0x69EE, 0x69F3, 0x69F6, 0x69FC, 0x6A01, 0x6A02, 0x6A05, 0x6A11, 0x6A13,
    0x6A19, 0x6A1E, 0x6A20, 0x6A22, 0x6A23, 0x6A24, 0x6A27, 0x6A2B, 0x6A33, 0x6A38,
    0x6A39, 0x6A3A, 0x6A3F, 0x6A48, 0x6A4B, 0x6A5F, 0x6A62, 0x6A6B, 0x6A6F, 0x6A81,
    0x6A89, 0x6A94, 0x6A9C, 0x6A9F, 0x6AA2, 0x6AA3, 0x6AAD, 0x6AAE, 0x6AAF, 0x6AB3,
    0x6AB5, 0x6AB8, 0x6ABB, 0x6AC3, 0x6AC5, 0x6ACD, 0x6AD3, 0x6ADA, 0x6ADB, 0x6ADD,
    0x6ADE, 0x6ADF, 0x6AE0, 0x6AE5, 0x6AE7, 0x6AE8, 0x6AEA, 0x6AEB, 0x6AEC, 0x6AF1,
    0x6AF3, 0x6AF8, 0x6AFB, 0x6B04, 0x6B05, 0x6B07, 0x6B0A, 0x6B0D, 0x6B0F, 0x6B10,
    0x6B11, 0x6B12, 0x6B13, 0x6B16, 0x6B18, 0x6B1E, 0x6B3D, 0x6B4E, 0x6B50, 0x6B5F,
    0x6B61, 0x6B72, 0x6B77, 0x6B78, 0x6B7F, 0x6B98, 0x6B9E, 0x6BA2, 0x6BA4, 0x6BA8,
    0x6BAB, 0x6BAD, 0x6BAE, 0x6BAF, 0x6BB0, 0x6BB2, 0x6BBA, 0x6BBB, 0x6BBC, 0x6BC0,
    0x6BC6, 0x6BCA, 0x6BFF, 0x6C02, 0x6C08, 0x6C0C, 0x6C23, 0x6C2B, 0x6C2C, 0x6C2D,
    0x6C33, 0x6C3E, 0x6C4E, 0x6C59, 0x6C7A, 0x6C92, 0x6C96, 0x6CC1, 0x6CDD, 0x6D29,
    0x6D36, 0x6D79, 0x6D7F, 0x6D87, 0x6D97, 0x6DBC, 0x6DD2, 0x6DDA, 0x6DE5, 0x6DE8,
    0x6DE9, 0x6DEA, 0x6DF5, 0x6DF6, 0x6DFA, 0x6E19, 0x6E1B, 0x6E22, 0x6E26, 0x6E2C,
    0x6E3E, 0x6E4A, 0x6E4B, 0x6E5E, 0x6E67, 0x6E6F, 0x6E88, 0x6E96, 0x6E9D, 0x6EA1,
    0x6EAB, 0x6EAE, 0x6EB3, 0x6EBC, 0x6EC4, 0x6EC5, 0x6ECC, 0x6ECE, 0x6ED9, 0x6EEC,
    0x6EEF, 0x6EF2, 0x6EF7, 0x6EF8, 0x6EFB, 0x6EFE, 0x6EFF, 0x6F01, 0x6F0A, 0x6F0D,
    0x6F1A, 0x6F22, 0x6F23, 0x6F2C, 0x6F32, 0x6F35, 0x6F38, 0x6F3F, 0x6F41, 0x6F51,
    0x6F54, 0x6F55, 0x6F59, 0x6F5A, 0x6F5B, 0x6F63, 0x6F64, 0x6F6F, 0x6F70, 0x6F77,
    0x6F7F, 0x6F80, 0x6F85, 0x6F86, 0x6F87, 0x6F90, 0x6F97, 0x6FA0, 0x6FA4, 0x6FA6,
    0x6FA9, 0x6FAB, 0x6FAC, 0x6FAE, 0x6FB1, 0x6FBE, 0x6FC1, 0x6FC3, 0x6FC4, 0x6FC6,
    0x6FD5, 0x6FD8, 0x6FDA, 0x6FDB, 0x6FDC, 0x6FDF, 0x6FE4, 0x6FE7, 0x6FEB, 0x6FF0,
    0x6FF1, 0x6FFA, 0x6FFC, 0x6FFE, 0x6FFF, 0x7002, 0x7003, 0x7005, 0x7006, 0x7007,
    0x7009, 0x700B, 0x700F, 0x7015, 0x7018, 0x701D, 0x701F, 0x7020, 0x7026, 0x7027,
    0x7028, 0x7030, 0x7032, 0x703E, 0x7043, 0x7044, 0x704D, 0x7051, 0x7052, 0x7055,
    0x7058, 0x7059, 0x705D, 0x7061, 0x7063, 0x7064, 0x7067, 0x7069, 0x707D, 0x70BA,
    0x70CF, 0x70F4, 0x7121, 0x7147, 0x7149, 0x7152, 0x7159, 0x7162, 0x7165, 0x7169,
    0x716C, 0x7171, 0x7182, 0x7185, 0x7189, 0x718C, 0x7192, 0x7193, 0x7197, 0x719A,
    0x71A1, 0x71B0, 0x71B1, 0x71B2, 0x71BE, 0x71C0, 0x71C1, 0x71C8, 0x71C9, 0x71D2,
    0x71D6, 0x71D9, 0x71DC, 0x71DF, 0x71E6, 0x71EC, 0x71ED, 0x71F4, 0x71F6, 0x71FB,
    0x71FC, 0x71FE, 0x7203, 0x7204, 0x7207, 0x720D, 0x7210, 0x7216, 0x721B, 0x7225,
    0x7227, 0x722D, 0x7232, 0x723A, 0x723E, 0x7240, 0x7246, 0x7258, 0x727D, 0x7296,
    0x729B, 0x729E, 0x72A2, 0x72A7, 0x72C0, 0x72F9, 0x72FD, 0x730C, 0x7319, 0x7336,
    0x733B, 0x7341, 0x7343, 0x7344, 0x7345, 0x734A, 0x734E, 0x7368, 0x7369, 0x736A,
    0x736B, 0x736E, 0x7370, 0x7371, 0x7372, 0x7375, 0x7377, 0x7378, 0x737A, 0x737B,
    0x737C, 0x7380, 0x7381, 0x73FC, 0x73FE, 0x7431, 0x743A, 0x743F, 0x744B, 0x7452,
    0x7463, 0x7464, 0x7469, 0x746A, 0x7472, 0x747B, 0x747D, 0x7489, 0x748A, 0x7495,
    0x7497, 0x749D, 0x74A1, 0x74A3, 0x74A6, 0x74AB, 0x74AF, 0x74B0, 0x74B5, 0x74B8,
    0x74BC, 0x74BD, 0x74BE, 0x74BF, 0x74C4, 0x74C5, 0x74CA, 0x74CF, 0x74D4, 0x74D5,
    0x74DA, 0x74DB, 0x750C, 0x7515, 0x7522, 0x7523, 0x7526, 0x752F, 0x755D, 0x7562,
    0x756B, 0x7570, 0x7575, 0x7576, 0x757C, 0x7587, 0x758A, 0x75D9, 0x75E0, 0x75EE,
    0x75FE, 0x7602, 0x760B, 0x760D, 0x7613, 0x761E, 0x7621, 0x7627, 0x762E, 0x7631,
    0x7632, 0x763A, 0x763B, 0x7642, 0x7646, 0x7647, 0x7649, 0x7650, 0x7652, 0x7658,
    0x765F, 0x7661, 0x7662, 0x7664, 0x7665, 0x7667, 0x7669, 0x766C, 0x766D, 0x766E,
    0x7670, 0x7671, 0x7672, 0x767C, 0x7681, 0x769A, 0x769F, 0x76B0, 0x76B8, 0x76BA,
    0x76C3, 0x76DC, 0x76DE, 0x76E1, 0x76E3, 0x76E4, 0x76E7, 0x76E8, 0x76EA, 0x771D,
    0x771E, 0x7725, 0x773E, 0x774D, 0x774F, 0x775C, 0x775E, 0x7798, 0x779C, 0x779E,
    0x77A4, 0x77B6, 0x77BC, 0x77C7, 0x77C9, 0x77D1, 0x77D3, 0x77DA, 0x77EF, 0x7843,
    0x785C, 0x7864, 0x7868, 0x786F, 0x7895, 0x7899, 0x78A9, 0x78AD, 0x78B8, 0x78BA,
    0x78BC, 0x78BD, 0x78D1, 0x78DA, 0x78E0, 0x78E3, 0x78E7, 0x78EF, 0x78FD, 0x78FE,
    0x7904, 0x7906, 0x790E, 0x7910, 0x7912, 0x7919, 0x7926, 0x792A, 0x792B, 0x792C,
    0x792E, 0x7931, 0x7955, 0x797F, 0x798D, 0x798E, 0x7995, 0x79A1, 0x79A6, 0x79AA,
    0x79AE, 0x79B0, 0x79B1, 0x79BF, 0x79C8, 0x7A05, 0x7A08, 0x7A0F, 0x7A1C, 0x7A1F,
    0x7A2E, 0x7A31, 0x7A40, 0x7A47, 0x7A4C, 0x7A4D, 0x7A4E, 0x7A60, 0x7A61, 0x7A62,
    0x7A69, 0x7A6B, 0x7A6D, 0x7AA9, 0x7AAA, 0x7AAE, 0x7AAF, 0x7AB5, 0x7AB6, 0x7ABA,
    0x7AC4, 0x7AC5, 0x7AC7, 0x7AC8, 0x7ACA, 0x7ADA, 0x7AEA, 0x7AF1, 0x7AF6, 0x7B46,
    0x7B4D, 0x7B67, 0x7B74, 0x7B87, 0x7B8B, 0x7B8F, 0x7BC0, 0x7BC4, 0x7BC9, 0x7BCB,
    0x7BD4, 0x7BD8, 0x7BE0, 0x7BE2, 0x7BE4, 0x7BE9, 0x7BF3, 0x7BF8, 0x7C00, 0x7C02,
    0x7C0D, 0x7C11, 0x7C1E, 0x7C21, 0x7C22, 0x7C23, 0x7C2B, 0x7C39, 0x7C3D, 0x7C3E,
    0x7C43, 0x7C45, 0x7C4B, 0x7C4C, 0x7C54, 0x7C59, 0x7C5B, 0x7C5C, 0x7C5F, 0x7C60,
    0x7C64, 0x7C69, 0x7C6A, 0x7C6C, 0x7C6E, 0x7C72, 0x7CB5, 0x7CC9, 0x7CDD, 0x7CDE,
    0x7CE7, 0x7CF0, 0x7CF2, 0x7CF4, 0x7CF6, 0x7CF9, 0x7CFA, 0x7CFE, 0x7D00, 0x7D02,
    0x7D03, 0x7D04, 0x7D05, 0x7D06, 0x7D07, 0x7D08, 0x7D09, 0x7D0B, 0x7D0D, 0x7D10,
    0x7D13, 0x7D14, 0x7D15, 0x7D16, 0x7D17, 0x7D18, 0x7D19, 0x7D1A, 0x7D1B, 0x7D1C,
    0x7D1D, 0x7D1E, 0x7D1F, 0x7D21, 0x7D2C, 0x7D2E, 0x7D30, 0x7D31, 0x7D32, 0x7D33,
    0x7D35, 0x7D39, 0x7D3A, 0x7D3C, 0x7D3F, 0x7D40, 0x7D41, 0x7D42, 0x7D43, 0x7D44,
    0x7D45, 0x7D46, 0x7D4D, 0x7D4E, 0x7D50, 0x7D55, 0x7D59, 0x7D5B, 0x7D5D, 0x7D5E,
    0x7D61, 0x7D62, 0x7D65, 0x7D66, 0x7D67, 0x7D68, 0x7D6A, 0x7D70, 0x7D71, 0x7D72,
    0x7D73, 0x7D76, 0x7D79, 0x7D7A, 0x7D80, 0x7D81, 0x7D83, 0x7D84, 0x7D86, 0x7D87,
    0x7D88, 0x7D89, 0x7D8B, 0x7D8C, 0x7D8E, 0x7D8F, 0x7D90, 0x7D91, 0x7D93, 0x7D96,
    0x7D9C, 0x7D9D, 0x7D9E, 0x7D9F, 0x7DA0, 0x7DA1, 0x7DA2, 0x7DA3, 0x7DA7, 0x7DAA,
    0x7DAB, 0x7DAC, 0x7DAD, 0x7DAF, 0x7DB0, 0x7DB1, 0x7DB2, 0x7DB3, 0x7DB4, 0x7DB5,
    0x7DB8, 0x7DB9, 0x7DBA, 0x7DBB, 0x7DBD, 0x7DBE, 0x7DBF, 0x7DC4, 0x7DC7, 0x7DCA,
    0x7DCB, 0x7DCD, 0x7DD1, 0x7DD2, 0x7DD3, 0x7DD4, 0x7DD7, 0x7DD8, 0x7DD9, 0x7DDA,
    0x7DDD, 0x7DDE, 0x7DDF, 0x7DE0, 0x7DE1, 0x7DE3, 0x7DE4, 0x7DE6, 0x7DE8, 0x7DE9,
    0x7DEC, 0x7DEE, 0x7DEF, 0x7DF0, 0x7DF1, 0x7DF2, 0x7DF4, 0x7DF6, 0x7DF7, 0x7DF8,
    0x7DF9, 0x7DFB, 0x7E08, 0x7E09, 0x7E0A, 0x7E0B, 0x7E0D, 0x7E0E, 0x7E10, 0x7E11,
    0x7E15, 0x7E17, 0x7E1B, 0x7E1D, 0x7E1E, 0x7E1F, 0x7E23, 0x7E27, 0x7E2B, 0x7E2C,
    0x7E2D, 0x7E2E, 0x7E2F, 0x7E30, 0x7E31, 0x7E32, 0x7E33, 0x7E34, 0x7E35, 0x7E36,
    0x7E37, 0x7E38, 0x7E39, 0x7E3A, 0x7E3D, 0x7E3E, 0x7E42, 0x7E43, 0x7E45, 0x7E46,
    0x7E48, 0x7E4F, 0x7E50, 0x7E52, 0x7E53, 0x7E54, 0x7E55, 0x7E5A, 0x7E5E, 0x7E5F,
    0x7E61, 0x7E62, 0x7E68, 0x7E69, 0x7E6A, 0x7E6B, 0x7E6C, 0x7E6D, 0x7E6E, 0x7E6F,
    0x7E70, 0x7E73, 0x7E76, 0x7E77, 0x7E78, 0x7E79, 0x7E7B, 0x7E7C, 0x7E7D, 0x7E7E,
    0x7E7F, 0x7E81, 0x7E86, 0x7E87, 0x7E88, 0x7E8A, 0x7E8C, 0x7E8D, 0x7E8F, 0x7E93,
    0x7E94, 0x7E95, 0x7E96, 0x7E97, 0x7E98, 0x7E9A, 0x7E9C, 0x7F3D, 0x7F43, 0x7F48,
    0x7F4C, 0x7F4E, 0x7F70, 0x7F75, 0x7F77, 0x7F85, 0x7F86, 0x7F88, 0x7F8B, 0x7FA3,
    0x7FA5, 0x7FA8, 0x7FA9, 0x7FB5, 0x7FB6, 0x7FD2, 0x7FEB, 0x7FEC, 0x7FF9, 0x7FFD,
    0x802C, 0x802E, 0x8056, 0x805E, 0x806F, 0x8070, 0x8072, 0x8073, 0x8075, 0x8076,
    0x8077, 0x8079, 0x807B, 0x807D, 0x807E, 0x8085, 0x8105, 0x8108, 0x811B, 0x8123,
    0x8125, 0x8129, 0x812B, 0x8139, 0x814E, 0x8156, 0x8161, 0x8166, 0x816A, 0x816B,
    0x8173, 0x8178, 0x8183, 0x8195, 0x819A, 0x819E, 0x81A0, 0x81A2, 0x81A9, 0x81B9,
    0x81BD, 0x81BE, 0x81BF, 0x81C9, 0x81CD, 0x81CF, 0x81D7, 0x81D8, 0x81DA, 0x81DF,
    0x81E0, 0x81E2, 0x81E5, 0x81E8, 0x81FA, 0x8207, 0x8208, 0x8209, 0x820A, 0x8218,
    0x8259, 0x8263, 0x8264, 0x8266, 0x826B, 0x8271, 0x8277, 0x82BB, 0x8332, 0x834A,
    0x838A, 0x8396, 0x83A2, 0x83A7, 0x83D5, 0x83EF, 0x83F4, 0x83F8, 0x8407, 0x840A,
    0x842C, 0x8434, 0x8435, 0x8449, 0x8452, 0x845D, 0x8464, 0x8466, 0x846F, 0x8477,
    0x848D, 0x8490, 0x8493, 0x8494, 0x8495, 0x849E, 0x84AD, 0x84BC, 0x84C0, 0x84C6,
    0x84CB, 0x84E7, 0x84EE, 0x84EF, 0x84F4, 0x84FD, 0x8504, 0x8514, 0x8518, 0x851E,
    0x8523, 0x8525, 0x8526, 0x852D, 0x852F, 0x853F, 0x8541, 0x8546, 0x854E, 0x8552,
    0x8553, 0x8555, 0x8558, 0x855D, 0x8562, 0x8569, 0x856A, 0x856D, 0x8573, 0x8577,
    0x857D, 0x8580, 0x8586, 0x8588, 0x858A, 0x858C, 0x8591, 0x8594, 0x8598, 0x859F,
    0x85A6, 0x85A9, 0x85B3, 0x85B4, 0x85B5, 0x85BA, 0x85CD, 0x85CE, 0x85DD, 0x85E5,
    0x85EA, 0x85ED, 0x85F6, 0x85F7, 0x85F9, 0x85FA, 0x8600, 0x8604, 0x8606, 0x8607,
    0x860A, 0x860B, 0x861A, 0x861E, 0x861F, 0x8622, 0x862D, 0x863A, 0x863F, 0x8646,
    0x8649, 0x8655, 0x865B, 0x865C, 0x865F, 0x8667, 0x866F, 0x86FA, 0x86FB, 0x8706,
    0x8740, 0x8755, 0x875F, 0x8766, 0x8768, 0x8778, 0x8784, 0x879E, 0x87A2, 0x87AE,
    0x87BB, 0x87BF, 0x87C2, 0x87C4, 0x87C8, 0x87CE, 0x87D8, 0x87DC, 0x87E3, 0x87EC,
    0x87EF, 0x87F2, 0x87F3, 0x87F6, 0x87FB, 0x8800, 0x8801, 0x8805, 0x8806, 0x880D,
    0x8810, 0x8811, 0x8814, 0x8819, 0x881F, 0x8823, 0x8826, 0x8828, 0x8831, 0x8836,
    0x883B, 0x883E, 0x8846, 0x884A, 0x8853, 0x8855, 0x885A, 0x885B, 0x885D, 0x889E,
    0x88CA, 0x88CF, 0x88DC, 0x88DD, 0x88E1, 0x88FD, 0x8907, 0x890C, 0x8918, 0x8932,
    0x8933, 0x8938, 0x893B, 0x8940, 0x8947, 0x8949, 0x894F, 0x8953, 0x8956, 0x8957,
    0x8958, 0x895D, 0x8960, 0x8964, 0x896A, 0x896C, 0x896F, 0x8970, 0x8972, 0x8974,
    0x8975, 0x8988, 0x898B, 0x898E, 0x898F, 0x8993, 0x8996, 0x8998, 0x899B, 0x89A1,
    0x89A5, 0x89A6, 0x89AA, 0x89AC, 0x89AF, 0x89B2, 0x89B7, 0x89B9, 0x89BA, 0x89BC,
    0x89BD, 0x89BF, 0x89C0, 0x89F4, 0x89F6, 0x89F8, 0x8A01, 0x8A02, 0x8A03, 0x8A08,
    0x8A0A, 0x8A0C, 0x8A0E, 0x8A0F, 0x8A10, 0x8A11, 0x8A12, 0x8A13, 0x8A15, 0x8A16,
    0x8A17, 0x8A18, 0x8A1B, 0x8A1C, 0x8A1D, 0x8A1E, 0x8A1F, 0x8A22, 0x8A23, 0x8A25,
    0x8A28, 0x8A29, 0x8A2A, 0x8A2D, 0x8A31, 0x8A34, 0x8A36, 0x8A3A, 0x8A3B, 0x8A3C,
    0x8A40, 0x8A41, 0x8A46, 0x8A4A, 0x8A4E, 0x8A50, 0x8A51, 0x8A52, 0x8A53, 0x8A54,
    0x8A55, 0x8A56, 0x8A57, 0x8A58, 0x8A5B, 0x8A5D, 0x8A5E, 0x8A60, 0x8A61, 0x8A62,
    0x8A63, 0x8A66, 0x8A69, 0x8A6A, 0x8A6B, 0x8A6C, 0x8A6D, 0x8A6E, 0x8A70, 0x8A71,
    0x8A72, 0x8A73, 0x8A75, 0x8A77, 0x8A7C, 0x8A7F, 0x8A82, 0x8A84, 0x8A85, 0x8A86,
    0x8A87, 0x8A8B, 0x8A8C, 0x8A8D, 0x8A91, 0x8A92, 0x8A95, 0x8A98, 0x8A9A, 0x8A9E,
    0x8AA0, 0x8AA1, 0x8AA3, 0x8AA4, 0x8AA5, 0x8AA6, 0x8AA8, 0x8AAA, 0x8AAB, 0x8AAC,
    0x8AB0, 0x8AB2, 0x8AB3, 0x8AB4, 0x8AB6, 0x8AB7, 0x8AB9, 0x8ABA, 0x8ABC, 0x8ABE,
    0x8ABF, 0x8AC2, 0x8AC4, 0x8AC7, 0x8AC9, 0x8ACB, 0x8ACD, 0x8ACF, 0x8AD1, 0x8AD2,
    0x8AD3, 0x8AD6, 0x8AD7, 0x8ADB, 0x8ADC, 0x8ADD, 0x8ADE, 0x8ADF, 0x8AE1, 0x8AE2,
    0x8AE3, 0x8AE4, 0x8AE5, 0x8AE6, 0x8AE7, 0x8AEB, 0x8AED, 0x8AEE, 0x8AEF, 0x8AF0,
    0x8AF1, 0x8AF2, 0x8AF3, 0x8AF4, 0x8AF6, 0x8AF7, 0x8AF8, 0x8AFA, 0x8AFC, 0x8AFE,
    0x8B00, 0x8B01, 0x8B02, 0x8B04, 0x8B05, 0x8B06, 0x8B09, 0x8B0A, 0x8B0E, 0x8B0F,
    0x8B10, 0x8B14, 0x8B16, 0x8B17, 0x8B19, 0x8B1A, 0x8B1B, 0x8B1D, 0x8B20, 0x8B21,
    0x8B28, 0x8B2B, 0x8B2C, 0x8B2D, 0x8B2F, 0x8B31, 0x8B33, 0x8B38, 0x8B39, 0x8B3E,
    0x8B41, 0x8B42, 0x8B45, 0x8B46, 0x8B49, 0x8B4A, 0x8B4E, 0x8B4F, 0x8B51, 0x8B53,
    0x8B56, 0x8B58, 0x8B59, 0x8B5A, 0x8B5C, 0x8B5E, 0x8B5F, 0x8B68, 0x8B6B, 0x8B6D,
    0x8B6F, 0x8B70, 0x8B74, 0x8B77, 0x8B78, 0x8B7D, 0x8B7E, 0x8B80, 0x8B85, 0x8B8A,
    0x8B8B, 0x8B8C, 0x8B8E, 0x8B92, 0x8B93, 0x8B95, 0x8B96, 0x8B9A, 0x8B9C, 0x8B9E,
    0x8C48, 0x8C4E, 0x8C50, 0x8C54, 0x8C6C, 0x8C75, 0x8C76, 0x8C93, 0x8C97, 0x8C99,
    0x8C9D, 0x8C9E, 0x8C9F, 0x8CA0, 0x8CA1, 0x8CA2, 0x8CA7, 0x8CA8, 0x8CA9, 0x8CAA,
    0x8CAB, 0x8CAC, 0x8CAF, 0x8CB0, 0x8CB2, 0x8CB3, 0x8CB4, 0x8CB6, 0x8CB7, 0x8CB8,
    0x8CBA, 0x8CBB, 0x8CBC, 0x8CBD, 0x8CBF, 0x8CC0, 0x8CC1, 0x8CC2, 0x8CC3, 0x8CC4,
    0x8CC5, 0x8CC7, 0x8CC8, 0x8CCA, 0x8CD1, 0x8CD2, 0x8CD3, 0x8CD5, 0x8CD9, 0x8CDA,
    0x8CDC, 0x8CDD, 0x8CDE, 0x8CDF, 0x8CE0, 0x8CE1, 0x8CE2, 0x8CE3, 0x8CE4, 0x8CE6,
    0x8CE7, 0x8CEA, 0x8CEB, 0x8CEC, 0x8CED, 0x8CF0, 0x8CF4, 0x8CF5, 0x8CFA, 0x8CFB,
    0x8CFC, 0x8CFD, 0x8CFE, 0x8D03, 0x8D04, 0x8D05, 0x8D07, 0x8D08, 0x8D09, 0x8D0A,
    0x8D0B, 0x8D0D, 0x8D0F, 0x8D10, 0x8D11, 0x8D13, 0x8D14, 0x8D16, 0x8D17, 0x8D1A,
    0x8D1B, 0x8D1C, 0x8D6C, 0x8D95, 0x8D99, 0x8DA8, 0x8DB2, 0x8DE1, 0x8E10, 0x8E30,
    0x8E34, 0x8E4C, 0x8E54, 0x8E55, 0x8E5F, 0x8E60, 0x8E63, 0x8E64, 0x8E73, 0x8E7A,
    0x8E7B, 0x8E82, 0x8E89, 0x8E8A, 0x8E8B, 0x8E8D, 0x8E8E, 0x8E91, 0x8E92, 0x8E93,
    0x8E95, 0x8E98, 0x8E9A, 0x8E9D, 0x8EA1, 0x8EA5, 0x8EA6, 0x8EAA, 0x8EC0, 0x8EC9,
    0x8ECA, 0x8ECB, 0x8ECC, 0x8ECD, 0x8ECF, 0x8ED1, 0x8ED2, 0x8ED4, 0x8ED5, 0x8ED7,
    0x8EDB, 0x8EDC, 0x8EDD, 0x8EDF, 0x8EE4, 0x8EE8, 0x8EEB, 0x8EEC, 0x8EF2, 0x8EF7,
    0x8EF8, 0x8EF9, 0x8EFA, 0x8EFB, 0x8EFC, 0x8EFE, 0x8EFF, 0x8F03, 0x8F04, 0x8F05,
    0x8F07, 0x8F08, 0x8F09, 0x8F0A, 0x8F0B, 0x8F12, 0x8F13, 0x8F14, 0x8F15, 0x8F16,
    0x8F17, 0x8F1B, 0x8F1C, 0x8F1D, 0x8F1E, 0x8F1F, 0x8F22, 0x8F25, 0x8F26, 0x8F28,
    0x8F29, 0x8F2A, 0x8F2C, 0x8F2E, 0x8F2F, 0x8F33, 0x8F36, 0x8F37, 0x8F38, 0x8F3B,
    0x8F3E, 0x8F3F, 0x8F40, 0x8F42, 0x8F44, 0x8F45, 0x8F46, 0x8F47, 0x8F49, 0x8F4A,
    0x8F4D, 0x8F4E, 0x8F50, 0x8F54, 0x8F57, 0x8F5F, 0x8F60, 0x8F61, 0x8F62, 0x8F63,
    0x8F64, 0x8FA6, 0x8FAD, 0x8FAE, 0x8FAF, 0x8FB2, 0x8FF4, 0x9015, 0x9019, 0x9023,
    0x9031, 0x9032, 0x904A, 0x904B, 0x904E, 0x9054, 0x9055, 0x9059, 0x905C, 0x905E,
    0x9060, 0x9061, 0x9069, 0x9071, 0x9072, 0x9077, 0x9078, 0x907A, 0x907C, 0x9081,
    0x9084, 0x9087, 0x908A, 0x908F, 0x9090, 0x90DF, 0x90F5, 0x9106, 0x9109, 0x9112,
    0x9114, 0x9116, 0x911F, 0x9127, 0x9129, 0x912D, 0x9130, 0x9132, 0x9133, 0x9134,
    0x9136, 0x913A, 0x9147, 0x9148, 0x9183, 0x919C, 0x919E, 0x919F, 0x91A3, 0x91AB,
    0x91AC, 0x91B1, 0x91B2, 0x91B6, 0x91C0, 0x91C1, 0x91C3, 0x91C5, 0x91CB, 0x91D0,
    0x91D2, 0x91D3, 0x91D4, 0x91D5, 0x91D7, 0x91D8, 0x91D9, 0x91DA, 0x91DD, 0x91DF,
    0x91E3, 0x91E4, 0x91E6, 0x91E7, 0x91E8, 0x91E9, 0x91F2, 0x91F3, 0x91F4, 0x91F5,
    0x91F7, 0x91F9, 0x91FA, 0x91FE, 0x91FF, 0x9200, 0x9201, 0x9203, 0x9204, 0x9205,
    0x9206, 0x9207, 0x9208, 0x9209, 0x920B, 0x920D, 0x920E, 0x9210, 0x9211, 0x9212,
    0x9214, 0x9215, 0x9216, 0x9217, 0x921B, 0x921E, 0x9220, 0x9221, 0x9223, 0x9225,
    0x9226, 0x9227, 0x922E, 0x922F, 0x9230, 0x9232, 0x9233, 0x9234, 0x9237, 0x9238,
    0x9239, 0x923A, 0x923D, 0x923E, 0x923F, 0x9240, 0x9241, 0x9245, 0x9246, 0x9248,
    0x9249, 0x924A, 0x924B, 0x924D, 0x9251, 0x9254, 0x9255, 0x9257, 0x925A, 0x925B,
    0x925D, 0x925E, 0x9260, 0x9262, 0x9264, 0x9265, 0x9266, 0x9267, 0x926C, 0x926D,
    0x926E, 0x9273, 0x9276, 0x9277, 0x9278, 0x927A, 0x927B, 0x927D, 0x927E, 0x927F,
    0x9280, 0x9281, 0x9282, 0x9283, 0x9285, 0x9288, 0x928A, 0x928D, 0x928F, 0x9291,
    0x9293, 0x9296, 0x9298, 0x929A, 0x929B, 0x929C, 0x92A0, 0x92A3, 0x92A5, 0x92A6,
    0x92A8, 0x92A9, 0x92AA, 0x92AB, 0x92AC, 0x92B1, 0x92B3, 0x92B6, 0x92B7, 0x92B9,
    0x92BB, 0x92BC, 0x92C1, 0x92C2, 0x92C3, 0x92C5, 0x92C7, 0x92C9, 0x92CC, 0x92CF,
    0x92D0, 0x92D2, 0x92D7, 0x92D9, 0x92DD, 0x92DF, 0x92E0, 0x92E3, 0x92E4, 0x92E5,
    0x92E6, 0x92E8, 0x92E9, 0x92EA, 0x92ED, 0x92EE, 0x92EF, 0x92F0, 0x92F1, 0x92F6,
    0x92F8, 0x92F9, 0x92FC, 0x9300, 0x9301, 0x9302, 0x9304, 0x9306, 0x9307, 0x9308,
    0x930F, 0x9310, 0x9312, 0x9315, 0x9318, 0x9319, 0x931A, 0x931B, 0x931C, 0x931D,
    0x931E, 0x931F, 0x9320, 0x9321, 0x9322, 0x9324, 0x9325, 0x9326, 0x9328, 0x9329,
    0x932B, 0x932E, 0x932F, 0x9332, 0x9333, 0x9336, 0x9338, 0x933C, 0x933D, 0x9340,
    0x9341, 0x9343, 0x9344, 0x9345, 0x9346, 0x9347, 0x9348, 0x9349, 0x934A, 0x934B,
    0x934D, 0x9352, 0x9354, 0x9358, 0x935A, 0x935B, 0x9360, 0x9364, 0x9365, 0x9369,
    0x936C, 0x936D, 0x936E, 0x9370, 0x9375, 0x9376, 0x937A, 0x937C, 0x937E, 0x9382,
    0x9384, 0x9387, 0x9388, 0x938A, 0x938C, 0x938D, 0x9393, 0x9394, 0x9396, 0x9398,
    0x9399, 0x939A, 0x939B, 0x939D, 0x939E, 0x93A1, 0x93A2, 0x93A3, 0x93A6, 0x93A7,
    0x93A9, 0x93AA, 0x93AC, 0x93AD, 0x93AE, 0x93AF, 0x93B0, 0x93B2, 0x93B3, 0x93B5,
    0x93B6, 0x93B7, 0x93B8, 0x93BF, 0x93C3, 0x93C6, 0x93C7, 0x93C8, 0x93C9, 0x93CC,
    0x93CD, 0x93CF, 0x93D0, 0x93D1, 0x93D7, 0x93D8, 0x93DA, 0x93DC, 0x93DD, 0x93DE,
    0x93DF, 0x93E1, 0x93E2, 0x93E4, 0x93E5, 0x93E6, 0x93E8, 0x93F0, 0x93F5, 0x93F7,
    0x93F9, 0x93FA, 0x93FB, 0x93FD, 0x93FE, 0x9403, 0x9404, 0x9407, 0x9408, 0x940B,
    0x940D, 0x940E, 0x940F, 0x9410, 0x9412, 0x9413, 0x9414, 0x9418, 0x9419, 0x941D,
    0x9420, 0x9425, 0x9426, 0x9427, 0x9428, 0x9429, 0x942A, 0x942B, 0x942E, 0x942F,
    0x9432, 0x9433, 0x9435, 0x9436, 0x9438, 0x943A, 0x943C, 0x943D, 0x943F, 0x9440,
    0x9444, 0x9449, 0x944A, 0x944C, 0x9451, 0x9452, 0x9454, 0x9455, 0x945E, 0x9460,
    0x9463, 0x9465, 0x946A, 0x946D, 0x9470, 0x9471, 0x9472, 0x9474, 0x9477, 0x9479,
    0x947C, 0x947D, 0x947E, 0x947F, 0x9481, 0x9482, 0x9577, 0x9580, 0x9582, 0x9583,
    0x9586, 0x9588, 0x9589, 0x958B, 0x958C, 0x958D, 0x958E, 0x958F, 0x9590, 0x9591,
    0x9592, 0x9593, 0x9594, 0x9597, 0x9598, 0x959D, 0x959E, 0x95A1, 0x95A3, 0x95A4,
    0x95A5, 0x95A8, 0x95A9, 0x95AB, 0x95AC, 0x95AD, 0x95B1, 0x95B2, 0x95B5, 0x95B6,
    0x95B9, 0x95BB, 0x95BC, 0x95BD, 0x95BE, 0x95BF, 0x95C3, 0x95C6, 0x95C7, 0x95C8,
    0x95C9, 0x95CA, 0x95CB, 0x95CC, 0x95CD, 0x95D0, 0x95D1, 0x95D2, 0x95D3, 0x95D4,
    0x95D5, 0x95D6, 0x95DC, 0x95DE, 0x95E0, 0x95E1, 0x95E2, 0x95E4, 0x95E5, 0x9658,
    0x965D, 0x965E, 0x9663, 0x9670, 0x9673, 0x9678, 0x967D, 0x9689, 0x968A, 0x968E,
    0x9691, 0x9695, 0x969B, 0x96A4, 0x96A8, 0x96AA, 0x96AE, 0x96AF, 0x96B1, 0x96B4,
    0x96B8, 0x96BB, 0x96CB, 0x96D6, 0x96D9, 0x96DB, 0x96DC, 0x96DE, 0x96E2, 0x96E3,
    0x96F2, 0x96FB, 0x9711, 0x9722, 0x9723, 0x9727, 0x973C, 0x973D, 0x9742, 0x9744,
    0x9746, 0x9748, 0x9749, 0x975A, 0x975C, 0x975D, 0x9766, 0x9767, 0x9768, 0x978F,
    0x979D, 0x97A6, 0x97BD, 0x97BE, 0x97C1, 0x97C3, 0x97C6, 0x97C9, 0x97CB, 0x97CC,
    0x97CD, 0x97D3, 0x97D9, 0x97DA, 0x97DB, 0x97DC, 0x97DD, 0x97DE, 0x97E0, 0x97FB,
    0x97FF, 0x9801, 0x9802, 0x9803, 0x9805, 0x9806, 0x9807, 0x9808, 0x980A, 0x980C,
    0x980D, 0x980E, 0x980F, 0x9810, 0x9811, 0x9812, 0x9813, 0x9814, 0x9817, 0x9818,
    0x981C, 0x9820, 0x9821, 0x9824, 0x9826, 0x982B, 0x982D, 0x982E, 0x9830, 0x9832,
    0x9834, 0x9835, 0x9837, 0x9838, 0x9839, 0x983B, 0x983D, 0x9842, 0x9843, 0x9845,
    0x9846, 0x984C, 0x984D, 0x984E, 0x984F, 0x9852, 0x9853, 0x9854, 0x9857, 0x9858,
    0x9859, 0x985B, 0x985E, 0x9862, 0x9863, 0x9865, 0x9867, 0x986B, 0x986C, 0x986F,
    0x9870, 0x9871, 0x9873, 0x9874, 0x98A8, 0x98AD, 0x98AE, 0x98AF, 0x98B0, 0x98B1,
    0x98B3, 0x98B6, 0x98B7, 0x98B8, 0x98BA, 0x98BB, 0x98BC, 0x98BE, 0x98C0, 0x98C4,
    0x98C6, 0x98C8, 0x98CB, 0x98DB, 0x98E0, 0x98E2, 0x98E3, 0x98E5, 0x98E6, 0x98E9,
    0x98EA, 0x98EB, 0x98ED, 0x98EF, 0x98F1, 0x98F2, 0x98F4, 0x98F5, 0x98F6, 0x98FC,
    0x98FD, 0x98FE, 0x98FF, 0x9903, 0x9904, 0x9905, 0x9908, 0x9909, 0x990A, 0x990C,
    0x990E, 0x990F, 0x9911, 0x9912, 0x9913, 0x9914, 0x9915, 0x9916, 0x9917, 0x9918,
    0x991A, 0x991B, 0x991C, 0x991E, 0x9921, 0x9926, 0x9927, 0x9928, 0x992A, 0x992B,
    0x992C, 0x992D, 0x9931, 0x9933, 0x9935, 0x9936, 0x9937, 0x9938, 0x993A, 0x993C,
    0x993E, 0x993F, 0x9941, 0x9943, 0x9945, 0x9948, 0x9949, 0x994A, 0x994B, 0x994C,
    0x9951, 0x9952, 0x9957, 0x9958, 0x995C, 0x995E, 0x995F, 0x9960, 0x9962, 0x99AC,
    0x99AD, 0x99AE, 0x99AF, 0x99B1, 0x99B3, 0x99B4, 0x99B9, 0x99BC, 0x99C1, 0x99C3,
    0x99C9, 0x99CA, 0x99CE, 0x99D0, 0x99D1, 0x99D2, 0x99D3, 0x99D4, 0x99D5, 0x99D8,
    0x99D9, 0x99DA, 0x99DB, 0x99DD, 0x99DE, 0x99DF, 0x99E1, 0x99E2, 0x99E4, 0x99E7,
    0x99E9, 0x99EA, 0x99EB, 0x99ED, 0x99F0, 0x99F1, 0x99F6, 0x99F8, 0x99FB, 0x99FC,
    0x99FF, 0x9A01, 0x9A02, 0x9A03, 0x9A04, 0x9A05, 0x9A09, 0x9A0A, 0x9A0C, 0x9A0D,
    0x9A0E, 0x9A0F, 0x9A11, 0x9A14, 0x9A16, 0x9A19, 0x9A1A, 0x9A1C, 0x9A1D, 0x9A1E,
    0x9A1F, 0x9A20, 0x9A24, 0x9A27, 0x9A2A, 0x9A2B, 0x9A2D, 0x9A2E, 0x9A30, 0x9A31,
    0x9A34, 0x9A35, 0x9A36, 0x9A37, 0x9A38, 0x9A3B, 0x9A3C, 0x9A3E, 0x9A40, 0x9A41,
    0x9A42, 0x9A43, 0x9A44, 0x9A45, 0x9A4A, 0x9A4B, 0x9A4C, 0x9A4D, 0x9A4E, 0x9A4F,
    0x9A53, 0x9A55, 0x9A57, 0x9A59, 0x9A5A, 0x9A5B, 0x9A5F, 0x9A62, 0x9A64, 0x9A65,
    0x9A66, 0x9A68, 0x9A6A, 0x9A6B, 0x9AAF, 0x9ACF, 0x9AD2, 0x9AD4, 0x9AD5, 0x9AD6,
    0x9AEE, 0x9B06, 0x9B0D, 0x9B16, 0x9B1A, 0x9B20, 0x9B22, 0x9B25, 0x9B27, 0x9B28,
    0x9B29, 0x9B2E, 0x9B31, 0x9B39, 0x9B4E, 0x9B58, 0x9B5A, 0x9B5B, 0x9B5F, 0x9B62,
    0x9B65, 0x9B66, 0x9B68, 0x9B6F, 0x9B74, 0x9B75, 0x9B77, 0x9B7A, 0x9B7D, 0x9B80,
    0x9B81, 0x9B83, 0x9B84, 0x9B85, 0x9B86, 0x9B88, 0x9B8A, 0x9B8B, 0x9B8D, 0x9B8E,
    0x9B90, 0x9B91, 0x9B92, 0x9B93, 0x9B9A, 0x9B9C, 0x9B9D, 0x9B9E, 0x9B9F, 0x9BA0,
    0x9BA1, 0x9BA3, 0x9BA4, 0x9BA6, 0x9BAA, 0x9BAB, 0x9BAD, 0x9BAE, 0x9BAF, 0x9BB0,
    0x9BB3, 0x9BB5, 0x9BB6, 0x9BB8, 0x9BBA, 0x9BBF, 0x9BC0, 0x9BC1, 0x9BC4, 0x9BC6,
    0x9BC7, 0x9BC9, 0x9BCA, 0x9BD2, 0x9BD4, 0x9BD5, 0x9BD6, 0x9BD7, 0x9BDB, 0x9BDD,
    0x9BDE, 0x9BE1, 0x9BE2, 0x9BE4, 0x9BE7, 0x9BE8, 0x9BEA, 0x9BEB, 0x9BEC, 0x9BF0,
    0x9BF1, 0x9BF4, 0x9BF6, 0x9BF7, 0x9BFB, 0x9BFD, 0x9BFE, 0x9BFF, 0x9C01, 0x9C02,
    0x9C03, 0x9C06, 0x9C08, 0x9C09, 0x9C0A, 0x9C0B, 0x9C0C, 0x9C0D, 0x9C0F, 0x9C10,
    0x9C11, 0x9C12, 0x9C13, 0x9C15, 0x9C1B, 0x9C1C, 0x9C1F, 0x9C20, 0x9C23, 0x9C24,
    0x9C25, 0x9C26, 0x9C27, 0x9C28, 0x9C29, 0x9C2B, 0x9C2D, 0x9C2E, 0x9C31, 0x9C32,
    0x9C33, 0x9C35, 0x9C36, 0x9C37, 0x9C39, 0x9C3A, 0x9C3B, 0x9C3C, 0x9C3D, 0x9C3E,
    0x9C40, 0x9C42, 0x9C44, 0x9C45, 0x9C46, 0x9C47, 0x9C48, 0x9C49, 0x9C4A, 0x9C52,
    0x9C54, 0x9C56, 0x9C57, 0x9C58, 0x9C5A, 0x9C5D, 0x9C5F, 0x9C60, 0x9C62, 0x9C63,
    0x9C64, 0x9C67, 0x9C68, 0x9C6D, 0x9C6E, 0x9C6F, 0x9C72, 0x9C77, 0x9C78, 0x9C7A,
    0x9CE5, 0x9CE7, 0x9CE9, 0x9CEC, 0x9CF2, 0x9CF3, 0x9CF4, 0x9CF6, 0x9CF7, 0x9CFC,
    0x9CFD, 0x9CFE, 0x9D00, 0x9D03, 0x9D05, 0x9D06, 0x9D07, 0x9D09, 0x9D10, 0x9D12,
    0x9D14, 0x9D15, 0x9D17, 0x9D1B, 0x9D1C, 0x9D1D, 0x9D1E, 0x9D1F, 0x9D23, 0x9D25,
    0x9D26, 0x9D28, 0x9D2E, 0x9D2F, 0x9D30, 0x9D32, 0x9D33, 0x9D34, 0x9D37, 0x9D3B,
    0x9D3D, 0x9D3F, 0x9D41, 0x9D42, 0x9D43, 0x9D4A, 0x9D4F, 0x9D50, 0x9D51, 0x9D52,
    0x9D53, 0x9D5A, 0x9D5C, 0x9D5D, 0x9D5F, 0x9D60, 0x9D61, 0x9D67, 0x9D69, 0x9D6A,
    0x9D6B, 0x9D6C, 0x9D6E, 0x9D6F, 0x9D70, 0x9D72, 0x9D77, 0x9D7E, 0x9D84, 0x9D87,
    0x9D89, 0x9D8A, 0x9D8C, 0x9D92, 0x9D93, 0x9D96, 0x9D97, 0x9D98, 0x9D9A, 0x9DA0,
    0x9DA1, 0x9DA5, 0x9DA6, 0x9DA9, 0x9DAA, 0x9DAC, 0x9DAD, 0x9DAF, 0x9DB0, 0x9DB1,
    0x9DB2, 0x9DB4, 0x9DB9, 0x9DBA, 0x9DBB, 0x9DBC, 0x9DBF, 0x9DC0, 0x9DC1, 0x9DC2,
    0x9DC4, 0x9DC5, 0x9DC9, 0x9DCA, 0x9DD0, 0x9DD3, 0x9DD4, 0x9DD6, 0x9DD7, 0x9DD9,
    0x9DDA, 0x9DDF, 0x9DE3, 0x9DE4, 0x9DE5, 0x9DE6, 0x9DE8, 0x9DE9, 0x9DEB, 0x9DED,
    0x9DEF, 0x9DF2, 0x9DF3, 0x9DF4, 0x9DF7, 0x9DF8, 0x9DF9, 0x9DFA, 0x9DFD, 0x9DFF,
    0x9E02, 0x9E07, 0x9E0A, 0x9E0B, 0x9E0C, 0x9E0F, 0x9E11, 0x9E15, 0x9E17, 0x9E18,
    0x9E1A, 0x9E1B, 0x9E1D, 0x9E1E, 0x9E75, 0x9E79, 0x9E7A, 0x9E7C, 0x9E7D, 0x9E97,
    0x9EA5, 0x9EA8, 0x9EA9, 0x9EAA, 0x9EAB, 0x9EAC, 0x9EAF, 0x9EB2, 0x9EB3, 0x9EB4,
    0x9EB5, 0x9EB7, 0x9EBC, 0x9EC3, 0x9ECC, 0x9EDE, 0x9EE8, 0x9EF2, 0x9EF4, 0x9EF6,
    0x9EF7, 0x9EFD, 0x9EFF, 0x9F02, 0x9F09, 0x9F15, 0x9F34, 0x9F4A, 0x9F4B, 0x9F4E,
    0x9F4F, 0x9F52, 0x9F54, 0x9F55, 0x9F57, 0x9F58, 0x9F59, 0x9F5C, 0x9F5F, 0x9F60,
    0x9F61, 0x9F63, 0x9F66, 0x9F67, 0x9F69, 0x9F6A, 0x9F6C, 0x9F6D, 0x9F6E, 0x9F6F,
    0x9F70, 0x9F72, 0x9F74, 0x9F76, 0x9F77, 0x9F7C, 0x9F7E, 0x9F8D, 0x9F8E, 0x9F90,
    0x9F91, 0x9F93, 0x9F94, 0x9F95, 0x9F9C, 0x9FAD, 0x9FAF, 0x9FC1, 0x9FD3, 0x2005E,
    0x20325, 0x203E2, 0x2040A, 0x205E3, 0x20786, 0x2080E, 0x20B19, 0x20F43, 0x20FD5, 0x210A1,
    0x210C4, 0x210D5, 0x210E4, 0x21114, 0x21123, 0x2114F, 0x2116F, 0x2144D, 0x2146D, 0x214C1,
    0x214FE, 0x21516, 0x217B5, 0x217EB, 0x21839, 0x21883, 0x21B89, 0x21BA3, 0x21CF3, 0x21E17,
    0x21E6C, 0x21ED5, 0x21F57, 0x21FB1, 0x21FD6, 0x22370, 0x2283C, 0x228D0, 0x228DA, 0x228ED,
    0x22929, 0x22931, 0x2293F, 0x22BF7, 0x22D92, 0x22DAB, 0x22DEE, 0x22E7F, 0x22EB3, 0x23236,
    0x232CB, 0x23350, 0x2364E, 0x2372C, 0x23755, 0x237BB, 0x23829, 0x23832, 0x23BE9, 0x23BF4,
    0x23BF6, 0x23F4F, 0x23FB7, 0x23FC9, 0x24063, 0x24137, 0x24176, 0x24473, 0x24479, 0x2448E,
    0x244BB, 0x244CC, 0x244CE, 0x244E9, 0x24600, 0x246EE, 0x246F1, 0x24706, 0x2482E, 0x2489F,
    0x248BB, 0x24A42, 0x24ABA, 0x24AE9, 0x24B05, 0x24CF7, 0x24CF8, 0x24DC3, 0x24E2B, 0x24E94,
    0x2529D, 0x25303, 0x253DD, 0x25565, 0x25585, 0x255B2, 0x255C7, 0x255FD, 0x25710, 0x25730,
    0x257B5, 0x258A2, 0x258B6, 0x258B7, 0x25A10, 0x25A82, 0x25BE4, 0x25D28, 0x25D3C, 0x25D43,
    0x25D4A, 0x25DBD, 0x25E20, 0x25EE6, 0x25F3D, 0x25F56, 0x25FAF, 0x25FCA, 0x26016, 0x26085,
    0x260C4, 0x260E9, 0x26147, 0x26148, 0x261B2, 0x26480, 0x26516, 0x26627, 0x267FC, 0x26805,
    0x2685D, 0x26888, 0x268CE, 0x269FA, 0x26A99, 0x26ABD, 0x26C4C, 0x26F9F, 0x27388, 0x274AF,
    0x27525, 0x2755F, 0x27717, 0x27735, 0x2775E, 0x277AB, 0x277C0, 0x27874, 0x27884, 0x2799D,
    0x279A7, 0x27A55, 0x27A59, 0x27A7C, 0x27ADD, 0x27B24, 0x27B48, 0x27B79, 0x27CDF, 0x27D73,
    0x27D94, 0x27DA7, 0x27DCE, 0x27E18, 0x27E48, 0x27F6F, 0x28090, 0x28123, 0x2814D, 0x281AA,
    0x281C1, 0x281DE, 0x281E4, 0x281F0, 0x281FD, 0x2820A, 0x2820C, 0x282B0, 0x282B8, 0x282BB,
    0x282E2, 0x28308, 0x28370, 0x2838C, 0x283AE, 0x283E0, 0x283E5, 0x287BA, 0x287CA, 0x288BF,
    0x288C8, 0x288DE, 0x288E7, 0x2893B, 0x2895B, 0x2895F, 0x289AB, 0x289C0, 0x289DC, 0x289F0,
    0x289F1, 0x28A0F, 0x28A1B, 0x28A22, 0x28A70, 0x28A95, 0x28AD2, 0x28B16, 0x28B46, 0x28B4E,
    0x28B56, 0x28B78, 0x28B82, 0x28BB3, 0x28BC5, 0x28BDF, 0x28C03, 0x28C0B, 0x28C25, 0x28C32,
    0x28CB3, 0x28CD1, 0x28CD5, 0x28D17, 0x28D39, 0x28D69, 0x28D78, 0x28D80, 0x28D8F, 0x28DAE,
    0x28DB2, 0x28DF2, 0x28F33, 0x28F4F, 0x29028, 0x29159, 0x29396, 0x293A2, 0x293C2, 0x293E0,
    0x293EA, 0x293F7, 0x29454, 0x2948E, 0x294E3, 0x294E5, 0x29511, 0x29533, 0x295B0, 0x295C0,
    0x295D3, 0x295F4, 0x29600, 0x2961D, 0x29639, 0x2963A, 0x29648, 0x2969B, 0x296A5, 0x296A9,
    0x296B5, 0x296C6, 0x296CC, 0x296E1, 0x296E9, 0x29707, 0x29726, 0x29735, 0x29754, 0x2977D,
    0x29784, 0x297A6, 0x297AF, 0x297D0, 0x297D7, 0x29834, 0x29863, 0x2987A, 0x298A1, 0x298B4,
    0x298B8, 0x298BE, 0x298CF, 0x298D1, 0x298EB, 0x298F5, 0x298FA, 0x2990A, 0x29919, 0x29932,
    0x29938, 0x29944, 0x29947, 0x29949, 0x29951, 0x299A0, 0x299C6, 0x29B59, 0x29BC1, 0x29BF3,
    0x29C00, 0x29C39, 0x29CE4, 0x29D35, 0x29D66, 0x29D69, 0x29D79, 0x29D81, 0x29D98, 0x29DB0,
    0x29DB1, 0x29DF0, 0x29E03, 0x29E04, 0x29E21, 0x29E26, 0x29ED7, 0x29EEC, 0x29EEE, 0x29F36,
    0x29F47, 0x29FC5, 0x29FE4, 0x29FEA, 0x2A016, 0x2A026, 0x2A03E, 0x2A048, 0x2A056, 0x2A086,
    0x2A0CD, 0x2A0CF, 0x2A0D2, 0x2A0E7, 0x2A106, 0x2A115, 0x2A142, 0x2A1B7, 0x2A1F3, 0x2A23C,
    0x2A278, 0x2A2FF, 0x2A32D, 0x2A360, 0x2A4F0, 0x2A535, 0x2A600, 0x2A62F, 0x2A64F, 0x2A7D6,
    0x2ADD3, 0x2B4A1, 0x2B726,
};

}  // namespace cowrite::text::han
